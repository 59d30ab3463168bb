"""
Order determination by norms of a symmetric connection.

For positive definite ``A, B`` and a nontrivial symmetric connection
``sigma``, ``A <= B`` holds exactly when ``||A sigma X|| <= ||B sigma X||``
for every positive ``X`` that is a function of ``B - A``. This module checks
both sides numerically, scans the limits used in the constructive direction,
and searches for an explicit violating ``X = s P + s delta I`` whenever
``A`` is not below ``B``.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .catalog import Connection
from .errors import (
    BoundaryAmbiguityError,
    InputError,
    PreconditionError,
    SearchFailureError,
    TheoremViolationError,
)
from .loewner import split_h
from .matcore import (
    below,
    compression_max_lambda,
    loewner_leq,
    matrix_to_json,
    operator_norm,
    projection_rank,
    spectral_projection,
    sym_eig,
    symmetrize,
    tau_psd,
)
from .means import RepresentingFunction, connection_eval, transpose_fn

log = logging.getLogger(__name__)

TOL_LIMIT = 1e-6
EPS_FRACTIONS = (0.9, 0.5, 0.1)
DELTA_GRID = (0.0, 1e-6, 1e-3, 0.1, 0.5, 1.0)
S_GRID = tuple(2.0**k for k in range(31))
COMMUTE_RTOL = 1e-9


def tol_norm(A, B, X=None):
    """``1e-9 (1 + max(||A||, ||B||, ||X||))``; ``X`` may be a stack."""
    scale = max(float(operator_norm(A)), float(operator_norm(B)))
    if X is None:
        return 1e-9 * (1.0 + scale)
    return 1e-9 * (1.0 + np.maximum(scale, operator_norm(X)))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class WitnessReport:
    P: np.ndarray = field(repr=False)
    s: float
    delta: float
    eps: float
    norm_A: float
    norm_B: float
    tol: float
    evaluated: int = 0

    @property
    def margin(self):
        return self.norm_A - self.norm_B

    @property
    def rank(self):
        return projection_rank(self.P)

    def X(self):
        n = self.P.shape[0]
        return self.s * self.P + self.s * self.delta * np.eye(n)

    def to_json(self):
        return {
            "P": matrix_to_json(self.P),
            "rank": self.rank,
            "s": self.s,
            "delta": self.delta,
            "eps": self.eps,
            "norm_A": self.norm_A,
            "norm_B": self.norm_B,
            "margin": self.margin,
            "tol": self.tol,
        }


@dataclass(frozen=True)
class OrderVerdict:
    loewner: bool
    norm_dominated: bool
    witness: Optional[WitnessReport]
    mean_label: str
    samples_used: int

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.witness is not None and self.norm_dominated:
            raise TheoremViolationError("verdict carries a witness but claims domination")
        if self.loewner and self.witness is not None:
            raise TheoremViolationError("ordered pair carries a witness")
        if self.loewner != self.norm_dominated:
            raise TheoremViolationError(
                "order and norm domination disagree",
                {"loewner": self.loewner, "norm_dominated": self.norm_dominated},
            )

    def to_json(self):
        self.validate()
        return {
            "loewner": self.loewner,
            "norm_dominated": self.norm_dominated,
            "witness": None if self.witness is None else self.witness.to_json(),
            "mean_label": self.mean_label,
            "samples_used": self.samples_used,
        }


@dataclass(frozen=True)
class LimitScan:
    s_values: np.ndarray
    values: np.ndarray
    target: float
    extrapolated: float
    converged: bool
    s_star: Optional[float] = None

    @property
    def error(self):
        return abs(self.extrapolated - self.target)

    def to_csv(self):
        buf = io.StringIO()
        buf.write("s,value,target\n")
        for s, v in zip(self.s_values, self.values):
            buf.write(f"{s!r},{float(v)!r},{self.target!r}\n")
        return buf.getvalue()


def _settle(s_grid, values, target, tol_limit, stop):
    """Apply the stopping rule: three consecutive values within ``tol_limit``."""
    s_grid = np.asarray(s_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    for k in range(2, len(values)):
        window = values[k - 2 : k + 1]
        if np.ptp(window) <= tol_limit:
            end = k + 1 if stop else len(values)
            return LimitScan(
                s_grid[:end], values[:end], float(target), float(values[end - 1]), True, float(s_grid[k])
            )
    return LimitScan(s_grid, values, float(target), float(values[-1]), False, None)


def _check_grid(s_grid):
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.size < 4 or np.any(np.diff(s_grid) <= 0) or s_grid[0] <= 0:
        raise InputError("s grid must be ascending, positive, with at least 4 points")
    return s_grid


# ---------------------------------------------------------------------------
# the commutative algebra of B - A


def sample_gamma_positive(D, rng_seed, count):
    """
    ``count`` positive matrices ``g(D)`` with ``g(t) = p(t / r)^2 + c``, where
    ``p`` is a random polynomial of degree at most 3, ``c`` is in
    ``[0.05, 1]`` and ``r = max(1, ||D||)``.
    """
    if count < 1:
        raise InputError("count must be at least 1")
    dec = sym_eig(D)
    rng = np.random.default_rng(rng_seed)
    r = max(1.0, float(np.max(np.abs(dec.eigenvalues))))
    lam = dec.eigenvalues / r
    degree = rng.integers(0, 4, size=count)
    coef = rng.normal(size=(count, 4)) * (np.arange(4) <= degree[:, None])
    c = rng.uniform(0.05, 1.0, size=count)
    powers = lam[None, :] ** np.arange(4)[:, None]
    values = (coef @ powers) ** 2 + c[:, None]
    return dec.with_values(values)


def lower_projections(D):
    """Spectral projections of ``D`` onto ``(-inf, c)`` for each gap between distinct eigenvalues."""
    dec = sym_eig(D)
    w = dec.eigenvalues
    cuts = [(a + b) / 2 for a, b in zip(w[:-1], w[1:]) if b - a > 1e-7]
    return [spectral_projection(D, below(c), dec) for c in cuts]


def structured_family(Ps, s_grid=S_GRID, deltas=DELTA_GRID):
    """Stack of ``s P + s delta I`` over projections, deltas and scales."""
    out = []
    for P in Ps:
        I = np.eye(P.shape[0])
        for d in deltas:
            out.extend(s * (P + d * I) for s in s_grid)
    return np.array(out)


def _check_commute(D, X):
    comm = X @ D - D @ X
    bound = COMMUTE_RTOL * (1.0 + operator_norm(X) * float(operator_norm(D)))
    bad = np.max(np.abs(comm), axis=(-1, -2)) > bound
    if np.any(bad):
        raise InputError("X does not commute with B - A")


def norm_gaps(sigma: Connection, A, B, X_set):
    """``(||A sigma X|| - ||B sigma X||, tol(X))`` for each ``X`` in the stack."""
    X_set = symmetrize(X_set, "X")
    gap = operator_norm(sigma(A, X_set)) - operator_norm(sigma(B, X_set))
    return gap, tol_norm(A, B, X_set)


def norm_dominates(sigma: Connection, A, B, X_set, tol=None):
    """
    True iff ``||A sigma X|| <= ||B sigma X|| + tol`` for every ``X``.

    ``X_set`` members must commute with ``B - A``. ``tol`` defaults to
    :func:`tol_norm` evaluated per ``X``.
    """
    X_set = symmetrize(X_set, "X")
    if X_set.ndim == 2:
        X_set = X_set[None]
    _check_commute(np.asarray(B) - np.asarray(A), X_set)
    gap, auto_tol = norm_gaps(sigma, A, B, X_set)
    return bool(np.all(gap <= (auto_tol if tol is None else tol)))


# ---------------------------------------------------------------------------
# spectral-projection criteria and limit scans


@dataclass(frozen=True)
class ProjectionRow:
    eps: float
    rank: int
    norm_PAP: float
    norm_PBP: float
    maxlam_A: float
    maxlam_B: float


@dataclass(frozen=True)
class ProjectionReport:
    rows: tuple
    loewner: bool
    norms_ok: bool
    inclusion_ok: bool

    @property
    def consistent(self):
        return self.loewner == self.norms_ok == self.inclusion_ok


def prop2_criteria(A, B, eps_grid: Sequence[float]) -> ProjectionReport:
    """
    Compare ``A`` and ``B`` on the spectral projections ``P_eps`` of
    ``B - A`` for ``(-inf, -eps)``:

    * order: ``A <= B``;
    * norms: ``||P A P|| <= ||P B P||`` for every nonzero ``P_eps``;
    * inclusion: ``max{l : l P <= PAP} <= max{l : l P <= PBP}``, which is
      how the inclusion of the two sets of such ``l`` reads.

    Endpoints that collide with an eigenvalue are skipped.
    """
    A = symmetrize(A, "A")
    B = symmetrize(B, "B")
    if A.shape != B.shape:
        raise InputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    D = B - A
    dec = sym_eig(D)
    tol = tol_norm(A, B)
    rows = []
    for eps in eps_grid:
        try:
            P = spectral_projection(D, below(-eps), dec)
        except BoundaryAmbiguityError:
            log.debug("skipping eps=%g: endpoint on an eigenvalue", eps)
            continue
        if projection_rank(P) == 0:
            continue
        rows.append(
            ProjectionRow(
                float(eps),
                projection_rank(P),
                float(operator_norm(P @ A @ P)),
                float(operator_norm(P @ B @ P)),
                compression_max_lambda(A, P),
                compression_max_lambda(B, P),
            )
        )
    return ProjectionReport(
        tuple(rows),
        bool(loewner_leq(A, B, tau_psd(D))),
        all(r.norm_PAP <= r.norm_PBP + tol for r in rows),
        all(r.maxlam_A <= r.maxlam_B + tol for r in rows),
    )


def prop3_limit_scan(family: Callable, P, s_grid, limit, tol_limit=TOL_LIMIT, stop=True) -> LimitScan:
    """Scan ``||X_s + s P|| - s`` towards ``||P X P||`` where ``X = lim X_s``."""
    s_grid = _check_grid(s_grid)
    P = np.asarray(P, dtype=float)
    target = float(operator_norm(P @ np.asarray(limit, dtype=float) @ P))
    values = []
    for s in s_grid:
        values.append(float(operator_norm(np.asarray(family(s)) + s * P)) - s)
        scan = _settle(s_grid[: len(values)], values, target, tol_limit, stop)
        if stop and scan.converged:
            return scan
    return _settle(s_grid, values, target, tol_limit, stop)


def prop4_norm(f: RepresentingFunction, A, P):
    """
    ``||A sigma P|| = f°(1 / max{l >= 0 : l P <= P A^{-1} P})`` for
    ``f(0+) = 0``.
    """
    if f.f_at_0plus != 0:
        raise PreconditionError(f"{f.label}: closed form needs f(0+) = 0")
    if f.is_trivial():
        raise PreconditionError(f"{f.label}: closed form needs a non-affine f")
    if projection_rank(P) == 0:
        raise InputError("zero projection")
    A_inv = np.linalg.inv(np.asarray(A, dtype=float))
    lam = compression_max_lambda(0.5 * (A_inv + A_inv.T), P)
    return float(transpose_fn(f)(1.0 / lam))


def case2a_limit_scan(sigma: Connection, A, P, delta, s_grid=S_GRID, tol_limit=TOL_LIMIT) -> LimitScan:
    """
    Scan ``||A sigma (sP + s delta I)|| - beta s (1 + delta)`` towards
    ``(alpha + gamma) ||P A P||`` with ``gamma = integral over (0, inf) of
    (1 + t) dm``.
    """
    m = sigma.measure
    if m is None:
        raise PreconditionError(f"{sigma.label}: needs a measure")
    if not sigma.f.symmetric or m.atom0 <= 0:
        raise PreconditionError(f"{sigma.label}: needs a symmetric f with f(0+) > 0")
    if delta <= 0:
        raise InputError("delta must be positive")
    s_grid = _check_grid(s_grid)
    A = np.asarray(A, dtype=float)
    P = np.asarray(P, dtype=float)
    alpha, beta, gamma = m.atom0, m.atom_inf, m.interior_moment()
    target = (alpha + gamma) * float(operator_norm(P @ A @ P))
    I = np.eye(A.shape[0])
    X = s_grid[:, None, None] * (P + delta * I)
    values = operator_norm(sigma(A, X)) - beta * s_grid * (1.0 + delta)
    return _settle(s_grid, values, target, tol_limit, stop=True)


@dataclass(frozen=True)
class DivergenceScan:
    s_values: np.ndarray
    values: np.ndarray
    closed_form: np.ndarray
    bound: float
    c_A: float
    c_B: float

    @property
    def exceeds(self):
        return bool(self.values[-1] > self.bound)


def case2b_divergence_scan(sigma: Connection, A, B, P, s_grid=S_GRID) -> DivergenceScan:
    """
    Scan ``||A sigma_h (sP)|| - ||B sigma_h (sP)||`` against ``||alpha B||``,
    where ``h = f - alpha - alpha x``. When ``c_A > c_B`` and the interior
    first moment of the measure is infinite, the difference grows without
    bound.
    """
    if sigma.measure is None:
        raise PreconditionError(f"{sigma.label}: needs a measure")
    split = split_h(sigma.f, sigma.measure)
    if split.alpha <= 0:
        raise PreconditionError(f"{sigma.label}: needs f(0+) > 0")
    s_grid = _check_grid(s_grid)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    P = np.asarray(P, dtype=float)
    X = s_grid[:, None, None] * P
    h = split.h
    norm_a = operator_norm(connection_eval(h, A, X))
    norm_b = operator_norm(connection_eval(h, B, X))
    c_a = 1.0 / compression_max_lambda(np.linalg.inv(A), P)
    c_b = 1.0 / compression_max_lambda(np.linalg.inv(B), P)
    closed = s_grid * (h(c_a / s_grid) - h(c_b / s_grid))
    return DivergenceScan(
        s_grid, norm_a - norm_b, closed, split.alpha * float(operator_norm(B)), c_a, c_b
    )


# ---------------------------------------------------------------------------
# witness search and the full check


def _require_symmetric(sigma: Connection):
    if not sigma.f.symmetric:
        raise PreconditionError(f"{sigma.label}: connection is not symmetric")
    if sigma.f.is_trivial():
        raise PreconditionError(f"{sigma.label}: connection is trivial")


def witness_search(sigma: Connection, A, B) -> Optional[WitnessReport]:
    """
    Find ``X = s P + s delta I`` with ``P`` a spectral projection of
    ``B - A`` for ``(-inf, -eps)`` and ``||A sigma X|| - ||B sigma X||``
    above ten times the norm tolerance.

    Returns ``None`` when ``A <= B``. Raises :class:`SearchFailureError`
    (carrying the scan table) if the grid is exhausted.
    """
    _require_symmetric(sigma)
    A = symmetrize(A, "A")
    B = symmetrize(B, "B")
    D = B - A
    dec = sym_eig(D)
    if loewner_leq(A, B, tau_psd(D)):
        return None
    n = A.shape[0]
    I = np.eye(n)
    s = np.asarray(S_GRID)
    lam_min = abs(float(dec.eigenvalues[0]))
    table = []
    for frac in EPS_FRACTIONS:
        eps = frac * lam_min
        try:
            P = spectral_projection(D, below(-eps), dec)
        except BoundaryAmbiguityError:
            continue
        for delta in DELTA_GRID:
            X = s[:, None, None] * (P + delta * I)
            norm_a = operator_norm(sigma(A, X))
            norm_b = operator_norm(sigma(B, X))
            tol = tol_norm(A, B, X)
            margin = norm_a - norm_b
            table.extend(
                (eps, delta, float(si), float(m), float(t)) for si, m, t in zip(s, margin, tol)
            )
            hit = np.flatnonzero(margin > 10.0 * tol)
            if hit.size:
                k = hit[0]
                return WitnessReport(
                    P,
                    float(s[k]),
                    float(delta),
                    float(eps),
                    float(norm_a[k]),
                    float(norm_b[k]),
                    float(tol[k]),
                    evaluated=len(table),
                )
    raise SearchFailureError(f"{sigma.label}: no witness on the search grid", table)


def order_determination_check(sigma: Connection, A, B, sample_budget=1000, rng_seed=0) -> OrderVerdict:
    """
    Evaluate both sides of the equivalence for one pair.

    The norm side runs over ``sample_budget`` random positive functions of
    ``B - A`` together with ``s P + s delta I`` for every lower spectral
    projection ``P`` of ``B - A``; when ``A`` is not below ``B`` it also runs
    :func:`witness_search`.
    """
    _require_symmetric(sigma)
    A = symmetrize(A, "A")
    B = symmetrize(B, "B")
    D = B - A
    loewner = bool(loewner_leq(A, B, tau_psd(D)))
    X_set = sample_gamma_positive(D, rng_seed, sample_budget)
    Ps = lower_projections(D)
    if Ps:
        X_set = np.concatenate([X_set, structured_family(Ps)])
    gap, tol = norm_gaps(sigma, A, B, X_set)
    violations = int(np.sum(gap > tol))
    used = len(X_set)
    diagnostics = {"mean": sigma.label, "violations": violations, "max_gap": float(np.max(gap - tol))}
    if loewner:
        if violations:
            raise TheoremViolationError(f"{sigma.label}: ordered pair violates norm domination", diagnostics)
        return OrderVerdict(True, True, None, sigma.label, used)
    try:
        witness = witness_search(sigma, A, B)
    except SearchFailureError as exc:
        if not violations:
            diagnostics["scan"] = exc.table
            raise TheoremViolationError(f"{sigma.label}: unordered pair shows no norm violation", diagnostics) from exc
        log.warning("%s: witness grid exhausted; %d sampled violations remain", sigma.label, violations)
        return OrderVerdict(False, False, None, sigma.label, used + len(exc.table))
    return OrderVerdict(False, False, witness, sigma.label, used + witness.evaluated)
