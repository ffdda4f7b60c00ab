import json
import subprocess
import sys

import numpy as np
import pytest

from sympopt import cli
from sympopt.core import write_mat1
from sympopt.gaussian import symplectic_spectrum
from sympopt.hamiltonian import LatticeSpec, build_qdo


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    record = json.loads(out.out) if code == 0 and out.out.strip().startswith("{") else None
    return code, record, out.err


@pytest.fixture
def identity_file(tmp_path):
    path = tmp_path / "I.mat"
    write_mat1(path, np.eye(2))
    return path


@pytest.fixture
def dense_file(tmp_path):
    path = tmp_path / "H.mat"
    write_mat1(path, cli.random_hamiltonian(3, seed=7).H)
    return path


def test_solve_single_qdo(tmp_path, capsys):
    code, rec, _ = run(capsys, "solve", "--dims", 1, "--rho", 10, "--out-dir", tmp_path)
    assert code == 0
    assert rec["derived"]["E0_sopt"] == pytest.approx(1.5, abs=1e-12)
    out = tmp_path / rec["output_dir"].split("/")[-1]
    for name in ("factors/m1.mat", "factors/manifest.json", "gamma.mat", "trace.csv", "result.json"):
        assert (out / name).exists()


def test_solve_generic_file_matches_diagonalize(dense_file, tmp_path, capsys):
    code, rec, _ = run(capsys, "solve", "--file", dense_file, "--init", "zero", "--tol", 1e-8,
                       "--out-dir", tmp_path)
    assert code == 0 and rec["problem"]["structure"] == "generic"
    _, diag, _ = run(capsys, "diagonalize", "--file", dense_file, "--out-dir", tmp_path)
    assert rec["final_cost"] == pytest.approx(diag["oracle"]["E0_sd"], abs=1e-10)


def test_solve_oracle_metrics_name_reference(tmp_path, capsys):
    code, rec, _ = run(capsys, "solve", "--dims", 2, 2, "--rho", 1.9, "--tol", 1e-7, "--oracle",
                       "--out-dir", tmp_path)
    assert code == 0
    assert {"energy", "cm_frobenius", "delta_x_max", "delta_p_max", "spectrum_frobenius"} <= set(rec["errors"])
    for metric in rec["errors"].values():
        assert metric["reference"] and metric["solver_tol"] == 1e-7
    assert abs(rec["errors"]["energy"]["value"]) < 1e-10


def test_gap_identity(identity_file, tmp_path, capsys):
    code, rec, _ = run(capsys, "gap", "--file", identity_file, "--oracle", "--out-dir", tmp_path)
    assert code == 0
    assert rec["derived"]["gap_sopt"] == pytest.approx(1.0)
    assert rec["oracle"]["gap_sd"] == pytest.approx(1.0)


def test_partial_full_sum(tmp_path, capsys):
    code, rec, _ = run(capsys, "partial", "--random", 3, "--k", 3, "--tol", 1e-9, "--oracle",
                       "--out-dir", tmp_path)
    assert code == 0
    assert rec["derived"]["partial_sums"][-1] == pytest.approx(2 * rec["oracle"]["E0_sd"], abs=1e-6)


def test_partial_k1_matches_gap(tmp_path, capsys):
    args = ("--dims", 2, "--rho", 2, "--tol", 1e-9, "--out-dir", tmp_path)
    _, part, _ = run(capsys, "partial", "--k", 1, *args)
    _, gap, _ = run(capsys, "gap", "--method", "cg", *args)
    assert part["derived"]["partial_sums"][0] == pytest.approx(gap["derived"]["gap_sopt"], abs=1e-8)


def test_partial_k_range(tmp_path, capsys):
    code, _, err = run(capsys, "partial", "--dims", 1, "--rho", 2, "--k", 4, "--out-dir", tmp_path)
    assert code == 1 and "k must satisfy" in err


def test_diagonalize_outputs(tmp_path, capsys):
    code, rec, _ = run(capsys, "diagonalize", "--dims", 2, "--rho", 2, "--out-dir", tmp_path)
    assert code == 0
    assert rec["oracle"]["E0_sd"] == pytest.approx(2.988104, abs=5e-7)
    out = tmp_path / rec["output_dir"].split("/")[-1]
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "index,epsilon" and len(lines) == 7
    eps = float(lines[1].split(",")[1])
    assert eps == symplectic_spectrum(build_qdo(LatticeSpec((2,), 2.0))).eps[0]
    assert (out / "gamma_sd.mat").exists()


def test_diagonalize_identity(identity_file, tmp_path, capsys):
    _, rec, _ = run(capsys, "diagonalize", "--file", identity_file, "--out-dir", tmp_path)
    assert rec["oracle"]["spectrum"] == [1.0] and rec["oracle"]["E0_sd"] == 0.5


def test_diagonalize_cubic_reference(tmp_path, capsys):
    code, rec, _ = run(capsys, "diagonalize", "--dims", 3, 3, 3, "--rho", 1.9, "--out-dir", tmp_path)
    assert code == 0 and len(rec["oracle"]["spectrum"]) == 81


def test_gradcheck_energy_generic(capsys):
    code, rec, _ = run(capsys, "gradcheck", "--random", 4, "--mode", "energy")
    assert code == 0 and rec["derived"]["pass"]


@pytest.mark.parametrize("source", [("--random", 5), ("--dims", 2, "--rho", 1.9)])
def test_gradcheck_gap(capsys, source):
    code, rec, _ = run(capsys, "gradcheck", *source, "--mode", "gap", "--seed", 3)
    assert code == 0 and rec["derived"]["pass"]


def test_gradcheck_block_dual_path(capsys):
    code, rec, _ = run(capsys, "gradcheck", "--dims", 2, "--rho", 1.9)
    assert code == 0
    assert rec["derived"]["max_rel_dev"]["dual_path_max_abs"] <= 1e-10


def test_gradcheck_partial(capsys):
    code, _, _ = run(capsys, "gradcheck", "--random", 6, "--mode", "partial", "--k", 3)
    assert code == 0


def test_gradcheck_catches_corrupted_gradient(capsys, monkeypatch):
    honest = cli.analytic_blocks

    def corrupted(f, ham):
        blocks = honest(f, ham)
        for path in blocks.values():
            path[1] = path[1] * 1.001
        return blocks

    ham = cli.random_hamiltonian(3)
    assert max(cli.gradcheck(ham, blocks_fn=corrupted).values()) > 1e-6
    monkeypatch.setattr(cli, "analytic_blocks", corrupted)
    code, _, err = run(capsys, "gradcheck", "--random", 3)
    assert code == 2 and "disagrees" in err


def test_gradcheck_dimension_limit(capsys):
    code, _, err = run(capsys, "gradcheck", "--dims", 3, "--rho", 2)
    assert code == 1 and "d <= 8" in err


def test_compare_recomputes_from_artifacts(tmp_path, capsys):
    _, rec, _ = run(capsys, "solve", "--dims", 2, "--rho", 1.9, "--c", 0.1, "--tol", 1e-7,
                    "--oracle", "--out-dir", tmp_path)
    code, cmp, _ = run(capsys, "compare", "--run", rec["output_dir"])
    assert code == 0
    assert cmp["derived"]["recomputation_delta"] == 0.0
    assert cmp["errors"]["energy"]["value"] == rec["errors"]["energy"]["value"]


def test_compare_block_diagonal_keeps_cm_metrics(tmp_path, capsys):
    _, rec, _ = run(capsys, "solve", "--dims", 2, "--rho", 1.9, "--tol", 1e-7, "--oracle",
                    "--out-dir", tmp_path)
    _, cmp, _ = run(capsys, "compare", "--run", rec["output_dir"])
    assert cmp["errors"]["cm_frobenius"]["value"] == rec["errors"]["cm_frobenius"]["value"]


def test_compare_missing_run(tmp_path, capsys):
    code, _, _ = run(capsys, "compare", "--run", tmp_path / "missing")
    assert code == 1


def test_outputs_byte_reproducible(tmp_path, capsys):
    args = ("solve", "--dims", 2, 2, "--rho", 1.9, "--tol", 1e-7, "--oracle", "--no-timing",
            "--out-dir", tmp_path)
    _, rec, _ = run(capsys, *args)
    out = tmp_path / rec["output_dir"].split("/")[-1]
    first = {p: p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}
    run(capsys, *args)
    second = {p: p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}
    assert first == second and len(first) >= 8


def test_output_dirs_are_namespaced(tmp_path, capsys):
    _, a, _ = run(capsys, "solve", "--dims", 1, "--rho", 3, "--out-dir", tmp_path)
    _, b, _ = run(capsys, "solve", "--dims", 1, "--rho", 4, "--out-dir", tmp_path)
    assert a["output_dir"] != b["output_dir"]


def test_rho_sweep_warm_starts(tmp_path, capsys):
    code, rec, _ = run(capsys, "solve", "--dims", 2, 2, "--rho-list", 1.95, 1.92, 1.9,
                       "--tol", 1e-7, "--oracle", "--out-dir", tmp_path)
    assert code == 0
    rows = rec["derived"]["sweep"]
    assert [r["rho"] for r in rows] == [1.95, 1.92, 1.9]
    assert rows[-1]["steps"] < rows[0]["steps"]
    for r in rows:
        assert r["E0_sopt"] == pytest.approx(r["E0_sd"], abs=1e-9)
    sweep_csv = (tmp_path / rec["output_dir"].split("/")[-1] / "sweep.csv").read_text()
    assert sweep_csv.startswith("rho,E0_sopt,steps,status,E0_sd")


def test_warm_init_flag(tmp_path, capsys):
    _, rec, _ = run(capsys, "solve", "--dims", 2, "--rho", 1.95, "--tol", 1e-8, "--out-dir", tmp_path)
    warm = rec["output_dir"] + "/factors"
    code, w, _ = run(capsys, "solve", "--dims", 2, "--rho", 1.9, "--tol", 1e-8, "--init",
                     f"warm:{warm}", "--out-dir", tmp_path)
    _, cold, _ = run(capsys, "solve", "--dims", 2, "--rho", 1.9, "--tol", 1e-8, "--out-dir", tmp_path)
    assert code == 0 and w["steps"] < cold["steps"]


def test_gap_rejects_energy_warm_start(tmp_path, capsys):
    _, rec, _ = run(capsys, "solve", "--dims", 1, "--rho", 3, "--out-dir", tmp_path)
    code, _, err = run(capsys, "gap", "--dims", 1, "--rho", 3, "--warm-path",
                       rec["output_dir"] + "/factors", "--init", "warm", "--out-dir", tmp_path)
    assert code == 1 and "gap-mode" in err


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"task": "energy", "dims": [1], "rho": 3.0, "tol": 1e-8,
                               "out_dir": str(tmp_path)}))
    code, rec, _ = run(capsys, "solve", "--config", cfg, "--rho", 5)
    assert code == 0
    assert rec["problem"]["rho"] == 5.0 and rec["optimizer"]["tol"] == 1e-8


@pytest.mark.parametrize(
    "argv,needle",
    [
        (("solve",), "problem source"),
        (("solve", "--dims", 2), "needs --rho"),
        (("solve", "--dims", 2, "--rho", 2, "--random", 3), "problem source"),
        (("solve", "--dims", 2, "--rho", 2, "--init", "magic"), "unknown init"),
        (("solve", "--dims", 2, "--rho", 2, "--init", "warm"), "warm_path"),
        (("solve", "--dims", 2, "--rho", 2, "--method", "newton"), "invalid choice"),
        (("frobnicate",), "invalid choice"),
    ],
)
def test_usage_errors_exit_1(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 1 and needle in err


def test_bad_config_keys(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"dimz": [2]}')
    code, _, err = run(capsys, "solve", "--config", cfg)
    assert code == 1 and "dimz" in err
    cfg.write_text('{"task": "gap"}')
    code, _, err = run(capsys, "solve", "--config", cfg)
    assert code == 1 and "does not match" in err


def test_numerical_failure_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "solve", "--dims", 3, 3, "--rho", 0.5, "--out-dir", tmp_path)
    assert code == 2 and "not positive definite" in err


def test_floats_have_17_significant_digits(tmp_path, capsys):
    _, rec, _ = run(capsys, "diagonalize", "--dims", 2, "--rho", 2, "--out-dir", tmp_path)
    out = tmp_path / rec["output_dir"].split("/")[-1]
    stored = json.loads((out / "result.json").read_text())
    assert stored["oracle"]["E0_sd"] == symplectic_spectrum(build_qdo(LatticeSpec((2,), 2.0))).e0


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sympopt", "diagonalize", "--dims", "1", "--rho", "2",
         "--out-dir", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["oracle"]["E0_sd"] == 1.5
