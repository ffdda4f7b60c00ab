"""Unconstrained minimizers over flat parameter vectors.

One *step* is one call of the cost function, line-search probes included, so
step counts in :class:`ConvergenceTrace` are comparable across methods.
"""

from __future__ import annotations

import csv
import json
import logging
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import line_search

from .core import SymmetricParam, read_mat1, write_mat1
from .cost import TriangularFactors

log = logging.getLogger(__name__)

STATUSES = ("converged", "step_cap", "line_search_failure")

# relative cost noise tolerated by the derivative-based fallback search
COST_NOISE_RTOL = 1e-12


@dataclass
class LineSearchConfig:
    """``kind`` is ``"wolfe"`` (strong Wolfe, cubic zoom) or ``"armijo"`` (backtracking)."""

    kind: str = "wolfe"
    c1: float = 1e-4
    c2: float = 0.1
    shrink: float = 0.5
    max_probes: int = 20

    def __post_init__(self):
        if self.kind not in ("wolfe", "armijo"):
            raise ValueError(f"unknown line search {self.kind!r}")
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("line search needs 0 < c1 < c2 < 1")


@dataclass
class OptimizerConfig:
    method: str = "cg"
    tol: float = 1e-5
    max_steps: int = 10_000
    learning_rate: float = 0.26
    momentum: float = 0.95
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("cg", "gd_momentum"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if isinstance(self.line_search, dict):
            self.line_search = LineSearchConfig(**self.line_search)


@dataclass
class TraceRecord:
    step: int
    cost: float
    grad_norm: float
    elapsed_s: float


@dataclass
class ConvergenceTrace:
    records: list[TraceRecord] = field(default_factory=list)
    status: str = "step_cap"
    provenance: str = ""
    line_searches: int = 0

    def __len__(self):
        return len(self.records)

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    def steps_to(self, target: float) -> int | None:
        """First step whose cost is <= ``target`` (None if never reached)."""
        for r in self.records:
            if r.cost <= target:
                return r.step
        return None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            if self.provenance:
                fh.write(f"# {self.provenance}\n")
            w = csv.writer(fh)
            w.writerow(["step", "cost", "grad_norm", "elapsed_s"])
            for r in self.records:
                w.writerow([r.step, f"{r.cost:.17g}", f"{r.grad_norm:.17g}", f"{r.elapsed_s:.6f}"])


class OptimizationError(RuntimeError):
    def __init__(self, msg, trace: ConvergenceTrace | None = None):
        super().__init__(msg)
        self.trace = trace


class _StepCap(Exception):
    pass


class _Counted:
    """Wraps ``fun(x) -> (f, g)``; records each call and the best point seen.

    Repeated requests for the most recent point are served from a cache and
    not counted.
    """

    def __init__(self, fun, max_steps, trace):
        self.fun = fun
        self.max_steps = max_steps
        self.trace = trace
        self.t0 = time.perf_counter()
        self.best_x = None
        self.best_f = np.inf
        self._last = (None, None)

    @property
    def calls(self) -> int:
        return len(self.trace.records)

    @property
    def exhausted(self) -> bool:
        return self.calls >= self.max_steps

    def __call__(self, x):
        key = np.asarray(x, dtype=float).tobytes()
        if self._last[0] == key:
            return self._last[1]
        if self.exhausted:
            raise _StepCap
        f, g = self.fun(x)
        f = float(f)
        gnorm = float(np.max(np.abs(g))) if np.all(np.isfinite(g)) else np.inf
        self.trace.records.append(
            TraceRecord(self.calls + 1, f, gnorm, time.perf_counter() - self.t0)
        )
        if np.isfinite(f) and np.isfinite(gnorm) and f < self.best_f:
            self.best_f, self.best_x = f, np.array(x, copy=True)
        self._last = (key, (f, g))
        return f, g


def _cubic_min(a, fa, ga, b, fb, gb):
    """Minimizer of the cubic interpolating (f, f') at a and b, or None."""
    d1 = ga + gb - 3 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(disc)
    denom = gb - ga + 2 * d2
    if denom == 0:
        return None
    return b - (b - a) * (gb + d2 - d1) / denom


def _armijo(phi, f0, dphi0, alpha, ls: LineSearchConfig):
    """Backtracking Armijo search with safeguarded cubic interpolation.

    ``phi(alpha) -> (f, g, dphi)``. Returns ``(alpha, f, g)`` or None.
    """
    for _ in range(ls.max_probes):
        f, g, dphi = phi(alpha)
        if np.isfinite(f) and f <= f0 + ls.c1 * alpha * dphi0:
            return alpha, f, g
        trial = None
        if np.isfinite(f) and np.isfinite(dphi):
            trial = _cubic_min(0.0, f0, dphi0, alpha, f, dphi)
        lo, hi = 0.1 * alpha, ls.shrink * alpha
        if trial is None or not np.isfinite(trial):
            alpha = hi
        else:
            alpha = min(max(trial, lo), hi)
    return None


def _wolfe(fun, x, p, f0, g0, f_prev, ls: LineSearchConfig):
    """Strong-Wolfe search (scipy). The first attempt starts from the step
    predicted by the previous decrease; if that fails, retry from a unit step,
    then fall back to :func:`_secant_search`."""
    for hint in (f_prev, None):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            step = line_search(
                lambda y: fun(y)[0],
                lambda y: fun(y)[1],
                x,
                p,
                gfk=g0,
                old_fval=f0,
                old_old_fval=hint,
                c1=ls.c1,
                c2=ls.c2,
                amax=1e100,
                maxiter=ls.max_probes,
            )[0]
        if step is not None:
            f, g = fun(x + step * p)
            return step, f, g
    return _secant_search(fun, x, p, f0, float(g0 @ p), ls)


def _secant_search(fun, x, p, f0, dphi0, ls: LineSearchConfig):
    """Secant iteration on ``phi'(alpha) = 0`` with approximate-Wolfe acceptance.

    Used once cost differences sink into rounding noise: a step is accepted
    when ``|phi'| <= c2 |phi'(0)|`` and the cost has not risen by more than
    ``COST_NOISE_RTOL * |f0|``. Exact on quadratics.
    """
    a_prev, d_prev, a = 0.0, dphi0, 1.0
    slack = COST_NOISE_RTOL * max(abs(f0), 1.0)
    for _ in range(ls.max_probes):
        f, g = fun(x + a * p)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            a = 0.5 * (a_prev + a)
            continue
        d = float(g @ p)
        if abs(d) <= ls.c2 * abs(dphi0) and f <= f0 + slack:
            return a, f, g
        if d == d_prev:
            return None
        a_new = a - d * (a - a_prev) / (d - d_prev)
        if not (np.isfinite(a_new) and a_new > 0):
            a_new = 2.0 * a if d < 0 else 0.5 * a
        a_prev, d_prev, a = a, d, a_new
    return None


def _minimize_cg(fun: _Counted, x, config: OptimizerConfig):
    """Polak-Ribiere+ conjugate gradients, restarting on non-descent directions."""
    ls = config.line_search
    f, g = fun(x)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise OptimizationError("non-finite cost or gradient at the initial point", fun.trace)
    p = -g
    f_prev = f + np.linalg.norm(g) / 2
    while True:
        if np.max(np.abs(g)) <= config.tol:
            return "converged"
        if fun.exhausted:
            return "step_cap"
        dphi0 = float(g @ p)
        alpha = min(1.0, 1.01 * 2 * (f - f_prev) / dphi0)
        if ls.kind == "wolfe":
            found = _wolfe(fun, x, p, f, g, f_prev, ls)
        else:

            def phi(a, x=x, p=p):
                fa, ga = fun(x + a * p)
                return fa, ga, float(ga @ p) if np.all(np.isfinite(ga)) else np.nan

            found = _armijo(phi, f, dphi0, alpha, ls)
        if found is None or not np.isfinite(found[1]) or not np.all(np.isfinite(found[2])):
            if not np.array_equal(p, -g):
                p = -g
                continue
            return "line_search_failure"
        alpha, f_new, g_new = found
        fun.trace.line_searches += 1
        x = x + alpha * p
        y = g_new - g
        beta = max(0.0, float(g_new @ y) / float(g @ g))
        p = -g_new + beta * p
        if float(g_new @ p) > -1e-12 * float(g_new @ g_new):
            p = -g_new
        f_prev, f, g = f, f_new, g_new


def _minimize_gd(fun: _Counted, x, config: OptimizerConfig, metric=None):
    velocity = np.zeros_like(x)
    scale = config.learning_rate if metric is None else config.learning_rate * metric
    while not fun.exhausted:
        f, g = fun(x)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            raise OptimizationError(
                f"non-finite cost or gradient at step {fun.calls}", fun.trace
            )
        if np.max(np.abs(g)) <= config.tol:
            return "converged"
        velocity = config.momentum * velocity - scale * g
        x = x + velocity
    return "step_cap"


def minimize(fun, x0, config: OptimizerConfig | None = None, provenance: str = "", metric=None):
    """Minimize ``fun(x) -> (value, gradient)`` from ``x0``.

    ``metric`` optionally rescales gradient-descent steps per parameter (see
    :meth:`TriangularFactors.step_metric`); CG ignores it. Returns the best
    parameters seen and the :class:`ConvergenceTrace`.
    """
    config = config or OptimizerConfig()
    x0 = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise OptimizationError("initial parameters are not finite")
    trace = ConvergenceTrace(provenance=provenance)
    counted = _Counted(fun, config.max_steps, trace)
    try:
        if config.method == "cg":
            trace.status = _minimize_cg(counted, x0, config)
        else:
            trace.status = _minimize_gd(counted, x0, config, metric)
    except _StepCap:
        trace.status = "step_cap"
    if trace.status == "line_search_failure":
        log.warning("line search failed after %d cost calls", counted.calls)
    return counted.best_x, trace


# --- initial points ---------------------------------------------------------


def init_gamma_t(ham, mode: str = "energy", k: int = 0) -> TriangularFactors:
    """Interaction-informed start ``M1 = K``, ``M2 = M3 = 0``.

    For a QDO lattice the coupling K is ``rho^-3 T``; for other Hamiltonians
    it is the off-diagonal part of the position block. The resulting CM is
    ``L3^T L3 = [[I, K], [K, I + K^2]]``. In gap mode m1 is the first row of K.
    """
    K = ham.coupling
    d = ham.d
    zero = SymmetricParam.zeros(d)
    if mode == "gap":
        return TriangularFactors(d, K[0].copy(), zero, zero, "gap")
    return TriangularFactors(d, SymmetricParam.from_symmetric(K), zero, zero, mode, k)


def init_zero(d: int, mode: str = "energy", k: int = 0) -> TriangularFactors:
    return TriangularFactors.zeros(d, mode, k)


# --- persistence ------------------------------------------------------------


def save_factors(directory, f: TriangularFactors, provenance: str = "") -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    m1 = f.m1[None, :] if f.mode == "gap" else f.m1.x[None, :]
    write_mat1(directory / "m1.mat", m1)
    write_mat1(directory / "m2.mat", f.m2.x[None, :])
    write_mat1(directory / "m3.mat", f.m3.x[None, :])
    manifest = {"d": f.d, "mode": f.mode, "k": f.k, "provenance": provenance}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_factors(directory):
    """Return ``(factors, manifest)`` from a directory written by :func:`save_factors`."""
    directory = Path(directory)
    try:
        manifest = json.loads((directory / "manifest.json").read_text())
        rows = [read_mat1(directory / f"m{i}.mat").reshape(-1) for i in (1, 2, 3)]
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot read factors from {directory}: {exc}") from exc
    d, mode = int(manifest["d"]), manifest["mode"]
    m1 = rows[0] if mode == "gap" else SymmetricParam(d, rows[0])
    f = TriangularFactors(
        d, m1, SymmetricParam(d, rows[1]), SymmetricParam(d, rows[2]), mode, int(manifest.get("k", 0))
    )
    return f, manifest


def warm_start_factors(directory, d: int, mode: str = "energy", k: int = 0) -> TriangularFactors:
    """Load saved factors as an initial point for a d-mode problem."""
    f, manifest = load_factors(directory)
    if f.d != d:
        raise ValueError(f"warm start has d={f.d}, target problem has d={d}")
    if (f.mode == "gap") != (mode == "gap"):
        raise ValueError(f"warm start is {f.mode}-mode, target is {mode}-mode")
    if f.mode == mode and (mode != "partial" or f.k == k):
        return f
    return TriangularFactors(d, f.m1, f.m2, f.m3, mode, k)


def config_dict(config: OptimizerConfig) -> dict:
    return asdict(config)
