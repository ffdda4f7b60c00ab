import numpy as np
import pytest

from sympopt.gaussian import NotPositiveDefiniteError
from sympopt.hamiltonian import (
    LatticeSpec,
    build_qdo,
    dipole_matrix,
    dipole_tensor,
    from_matrix,
    load_hamiltonian,
    save_hamiltonian,
)
from sympopt.core import write_mat1


def test_single_site_has_no_coupling():
    assert np.array_equal(dipole_matrix(LatticeSpec((1,), 2.0)), np.zeros((3, 3)))


def test_pair_along_z():
    T = dipole_tensor([[0, 0, 0], [0, 0, 1]])
    assert np.allclose(T[:3, 3:], np.diag([1.0, 1.0, -2.0]))
    assert np.allclose(T[:3, :3], 0)


def test_chain_runs_along_x():
    T = dipole_matrix(LatticeSpec((2,), 1.0))
    assert np.allclose(T[:3, 3:], np.diag([-2.0, 1.0, 1.0]))


def test_dipole_all_pairs_decay():
    T = dipole_matrix(LatticeSpec((3,), 1.0))
    assert T[0, 6] == pytest.approx(-2.0 / 8)
    assert np.allclose(T, T.T)


def test_single_qdo_is_identity():
    for rho in (0.5, 2.0, 10.0):
        assert np.array_equal(build_qdo(LatticeSpec((1,), rho)).H, np.eye(6))


def test_cubic_lattice_shape_and_spd():
    ham = build_qdo(LatticeSpec((3, 3, 3), 1.9))
    assert ham.d == 81 and ham.H.shape == (162, 162)
    assert np.linalg.eigvalsh(ham.H)[0] > 0
    assert ham.block_diagonal


def test_square_lattice_twelve_modes():
    ham = build_qdo(LatticeSpec((2, 2), 2.0))
    assert ham.d == 12
    assert np.allclose(ham.coupling, dipole_matrix(ham.spec) / 8)


def test_pm_coupling_blocks():
    ham = build_qdo(LatticeSpec((2, 2), 2.0, c=0.3))
    d = ham.d
    assert ham.structure == "pm_coupled" and not ham.block_diagonal
    assert np.allclose(ham.H[:d, d:], 0.3 * np.eye(d))
    assert np.allclose(ham.H[d:, :d], 0.3 * np.eye(d))


def test_unstable_lattice_rejected():
    with pytest.raises(NotPositiveDefiniteError, match="larger rho"):
        build_qdo(LatticeSpec((3, 3), 0.5))


def test_large_coupling_rejected():
    with pytest.raises(NotPositiveDefiniteError):
        build_qdo(LatticeSpec((2,), 3.0, c=1.2))


@pytest.mark.parametrize("dims", [(), (1, 1, 1, 1), (0, 2)])
def test_bad_dims(dims):
    with pytest.raises(ValueError):
        LatticeSpec(dims, 2.0)


def test_bad_rho():
    with pytest.raises(ValueError):
        LatticeSpec((2,), 0.0)


def test_load_identity(tmp_path):
    write_mat1(tmp_path / "h.mat", np.eye(4))
    ham = load_hamiltonian(tmp_path / "h.mat")
    assert ham.d == 2 and ham.structure == "generic"


def test_lattice_file_round_trip(tmp_path):
    ham = build_qdo(LatticeSpec((2, 2), 2.0))
    save_hamiltonian(tmp_path / "h.mat", ham)
    assert np.array_equal(load_hamiltonian(tmp_path / "h.mat").H, ham.H)


def test_load_indefinite(tmp_path):
    write_mat1(tmp_path / "h.mat", np.diag([1.0, -1.0, 1.0, 1.0]))
    with pytest.raises(NotPositiveDefiniteError, match="not positive definite"):
        load_hamiltonian(tmp_path / "h.mat")


def test_from_matrix_rejects_asymmetric():
    H = np.eye(2)
    H[0, 1] = 0.1
    with pytest.raises(ValueError, match="not symmetric"):
        from_matrix(H)


def test_from_matrix_symmetrizes_rounding():
    H = np.eye(2)
    H[0, 1] = 1e-15
    assert np.array_equal(from_matrix(H).H, from_matrix(H).H.T)


def test_generic_coupling_is_offdiagonal_position_block():
    H = np.array([[2.0, 0.3, 0.0, 0.0], [0.3, 1.0, 0.0, 0.0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert np.allclose(from_matrix(H).coupling, [[0, 0.3], [0.3, 0]])


def test_chain_blocks_translation_invariant():
    T = dipole_matrix(LatticeSpec((6,), 1.0)).reshape(6, 3, 6, 3)
    for i in range(6):
        for j in range(6):
            if i != j:
                assert np.allclose(T[i, :, j, :], T[0, :, abs(j - i), :])


@pytest.mark.parametrize("rho,ok", [(1.25, False), (1.27, True)])
def test_pair_critical_spacing(rho, ok):
    # longitudinal mode of a pair has V eigenvalue 1 - 2 / rho^3
    spec = LatticeSpec((2,), rho)
    if ok:
        build_qdo(spec)
    else:
        with pytest.raises(NotPositiveDefiniteError):
            build_qdo(spec)


def test_uncoupled_lattice_spectrum_is_sqrt_eigs():
    from sympopt.gaussian import symplectic_spectrum

    ham = build_qdo(LatticeSpec((2, 3), 1.9))
    ref = np.sqrt(np.linalg.eigvalsh(ham.V))
    assert np.allclose(symplectic_spectrum(ham).eps, ref, rtol=1e-10, atol=0)
