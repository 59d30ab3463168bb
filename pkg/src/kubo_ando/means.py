"""
Representing functions and functional-calculus evaluation of connections.

A connection is fixed by its representing function ``f`` through

    A sigma B = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}.

``f`` is only trusted to be operator monotone; what is checked at
construction is positivity, monotonicity and concavity on a log grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, InputError
from .matcore import _sym, apply_fn, as_psd, as_spd, operator_norm, sym_eig, symmetrize

STANDARD_GRID = np.geomspace(1e-6, 1e6, 64)
SYMMETRY_RTOL = 1e-10
SHAPE_RTOL = 1e-9
NOISE_FACTOR = 1e-14


def _symmetry_defect(func, x):
    fx = func(x)
    return np.abs(fx - x * func(1.0 / x)) / (1.0 + np.abs(fx))


@dataclass(frozen=True)
class RepresentingFunction:
    """
    Scalar operator-monotone function with its boundary data.

    ``func`` must be vectorized over positive arrays. ``f_at_0plus`` is
    ``f(0+)`` and ``transpose_at_0plus`` is ``f°(0+) = lim f(x)/x`` as
    ``x -> inf``; both must be supplied because they cannot be read off
    reliably from samples. ``symmetric`` and ``normalized`` are derived.
    """

    func: Callable = field(repr=False)
    f_at_0plus: float
    transpose_at_0plus: float
    label: str = "f"
    strict: bool = field(default=True, repr=False, compare=False)
    symmetric: bool = field(init=False)
    normalized: bool = field(init=False)

    def __post_init__(self):
        x = STANDARD_GRID
        with np.errstate(all="ignore"):
            fx = np.asarray(self.func(x), dtype=float)
        if fx.shape != x.shape or not np.all(np.isfinite(fx)):
            raise InputError(f"{self.label}: function must be finite and vectorized")
        if self.strict and not np.all(fx > 0):
            raise InputError(f"{self.label}: function must be positive on (0, inf)")
        if not self.strict and not np.all(fx >= -1e-10 * (1 + np.abs(fx))):
            raise InputError(f"{self.label}: function must be nonnegative on (0, inf)")
        if self.f_at_0plus < 0 or self.transpose_at_0plus < 0:
            raise InputError(f"{self.label}: boundary values must be nonnegative")
        if np.any(np.diff(fx) < -SHAPE_RTOL * np.abs(fx[:-1])):
            raise InputError(f"{self.label}: function is not nondecreasing")
        slopes = np.diff(fx) / np.diff(x)
        rise = np.diff(slopes)
        # slopes carry rounding of order eps |f| / dx
        noise = 8 * np.finfo(float).eps * np.abs(fx[1:-1]) / np.diff(x)[:-1]
        if np.any(rise > SHAPE_RTOL * (np.abs(slopes[:-1]) + np.abs(slopes[1:])) + noise):
            raise InputError(f"{self.label}: function is not concave")
        object.__setattr__(self, "symmetric", check_symmetric(self.func, x))
        with np.errstate(all="ignore"):
            one = float(np.asarray(self.func(np.array([1.0])))[0])
        object.__setattr__(self, "normalized", abs(one - 1.0) <= 1e-12)

    def __call__(self, x):
        """Evaluate, mapping ``x == 0`` to the right-limit ``f(0+)``."""
        x = np.asarray(x, dtype=float)
        zero = x == 0.0
        if np.any(x < 0):
            raise DomainError(f"{self.label}: negative argument")
        with np.errstate(all="ignore"):
            out = np.where(zero, self.f_at_0plus, self.func(np.where(zero, 1.0, x)))
        return out if out.ndim else float(out)

    def is_trivial(self):
        """True for the scalar multiples of ``1`` and of ``x``."""
        fx = self(STANDARD_GRID)
        f1 = self(1.0)
        const = np.allclose(fx, f1, rtol=1e-9, atol=0)
        linear = np.allclose(fx, f1 * STANDARD_GRID, rtol=1e-9, atol=0)
        return bool(const or linear)


def check_symmetric(f, grid: Sequence[float] = STANDARD_GRID) -> bool:
    """True iff ``|f(x) - x f(1/x)| <= 1e-10 (1 + f(x))`` on every grid point."""
    x = np.asarray(grid, dtype=float)
    if x.size == 0:
        raise InputError("symmetry check needs a nonempty grid")
    func = f.func if isinstance(f, RepresentingFunction) else f
    with np.errstate(all="ignore"):
        defect = _symmetry_defect(func, x)
    return bool(np.all(defect <= SYMMETRY_RTOL))


def _power(p):
    if p == 0:
        return np.sqrt
    if p == 1:
        return lambda t: (1.0 + t) / 2.0
    if p == -1:
        return lambda t: 2.0 * t / (1.0 + t)
    if p < 0:
        # (1 + t^p)/2)^(1/p) rewritten as t * ((1 + t^|p|)/2)^(-1/|p|) to avoid t^p overflow
        q = -p
        return lambda t: t * ((1.0 + t**q) / 2.0) ** (-1.0 / q)
    return lambda t: ((1.0 + t**p) / 2.0) ** (1.0 / p)


def make_power_fn(p: float) -> RepresentingFunction:
    """Power mean ``((1 + t^p)/2)^(1/p)``, with ``sqrt`` at ``p = 0``."""
    p = float(p)
    if not -1.0 <= p <= 1.0:
        raise DomainError(f"power-mean exponent {p} outside [-1, 1]")
    at0 = 0.5 ** (1.0 / p) if p > 0 else 0.0
    names = {1.0: "arithmetic", 0.0: "geometric", -1.0: "harmonic"}
    label = names.get(p, f"power:{p:g}")
    return RepresentingFunction(_power(p), at0, at0, label=label)


def transpose_fn(f: RepresentingFunction) -> RepresentingFunction:
    """``f°(x) = x f(1/x)``: the representing function of the reversed connection."""
    g = f.func
    return RepresentingFunction(
        lambda x: x * g(1.0 / x),
        f.transpose_at_0plus,
        f.f_at_0plus,
        label=f"transpose({f.label})",
        strict=f.strict,
    )


def mixture(weights: Sequence[float], fns: Sequence[RepresentingFunction], label=None):
    """Convex (or conic) combination ``sum w_i f_i``."""
    weights = [float(w) for w in weights]
    fns = list(fns)
    if len(weights) != len(fns) or not fns:
        raise InputError("mixture needs matching, nonempty weight and function lists")
    if any(w < 0 for w in weights) or sum(weights) <= 0:
        raise InputError("mixture weights must be nonnegative with positive sum")
    funcs = [f.func for f in fns]

    def func(x):
        return sum(w * g(x) for w, g in zip(weights, funcs))

    if label is None:
        label = "+".join(f"{w:g}*{f.label}" for w, f in zip(weights, fns))
    return RepresentingFunction(
        func,
        sum(w * f.f_at_0plus for w, f in zip(weights, fns)),
        sum(w * f.transpose_at_0plus for w, f in zip(weights, fns)),
        label=label,
    )


def _half_powers(A):
    dec = sym_eig(A)
    r = np.sqrt(dec.eigenvalues)
    return dec.with_values(r), dec.with_values(1.0 / r)


def connection_eval(f: RepresentingFunction, A, B):
    """
    ``A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}`` for positive definite ``A``
    and positive semidefinite ``B``.

    ``B`` may be a stack ``(..., n, n)``; ``A`` is shared across the stack.
    Eigenvalues of ``B`` below ``tau_psd(B)`` are zeroed, and the resulting
    null directions of the congruence are sent to ``f(0+)``.
    """
    A = as_spd(A, "A")
    B = symmetrize(B, "B")
    n = A.shape[-1]
    if B.shape[-1] != n:
        raise InputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    wb = np.linalg.eigvalsh(B)
    norm_b = np.max(np.abs(wb), axis=-1)
    tau_b = 1e-9 * (1.0 + norm_b)
    if np.any(wb[..., 0] < -tau_b):
        raise InputError("B is not positive semidefinite")
    singular = wb[..., 0] <= tau_b
    if np.any(singular):
        # only the singular members need their spectrum cleaned
        Bc = np.array(B)
        ws, Qs = np.linalg.eigh(B[singular])
        ws = np.where(ws <= tau_b[singular][..., None], 0.0, ws)
        Bc[singular] = (Qs * ws[..., None, :]) @ np.swapaxes(Qs, -1, -2)
    else:
        Bc = B
    Ah, Aih = _half_powers(A)
    return _congruence_apply(f, Ah, Aih, Bc, norm_b)


def _congruence_apply(f, Ah, Aih, B, norm_b):
    n = Ah.shape[-1]
    C = _sym(Aih @ B @ Aih)
    # rounding floor for eigenvalues of C that are structurally zero
    noise = NOISE_FACTOR * n * operator_norm(Aih) ** 2 * norm_b
    F = apply_fn(C, f.func, at_zero=f.f_at_0plus, zero_tol=noise)
    return _sym(Ah @ F @ Ah)


def extension_sequence(f: RepresentingFunction, A, B, max_halvings=60) -> Iterator:
    """
    Yield ``(eps, (A + eps I) sigma (B + eps I))`` for ``eps = 1, 1/2, 1/4, ...``.

    The shifts are applied on the eigenvalues of ``A`` and ``B`` (after
    clipping rounding-level negatives), so ``A + eps I`` is positive definite
    in floating point even when ``eps`` is below ``||A||`` machine epsilon.
    """
    A = as_psd(A, "A")
    B = as_psd(B, "B")
    da, db = sym_eig(A), sym_eig(B)
    wa = np.clip(da.eigenvalues, 0.0, None)
    wb = np.clip(db.eigenvalues, 0.0, None)
    for k in range(max_halvings + 1):
        eps = 2.0**-k
        ra = np.sqrt(wa + eps)
        Ah, Aih = da.with_values(ra), da.with_values(1.0 / ra)
        Be = db.with_values(wb + eps)
        yield eps, _congruence_apply(f, Ah, Aih, Be, wb[-1] + eps)


def connection_eval_psd(f: RepresentingFunction, A, B, tol=1e-9, max_halvings=60):
    """
    Extension of a connection to PSD arguments as the decreasing limit of
    ``(A + eps I) sigma (B + eps I)`` with ``eps = 2^-k``.

    Stops once successive iterates differ by at most ``tol`` in norm.
    """
    prev = prev_prev = None
    for _, cur in extension_sequence(f, A, B, max_halvings):
        if prev is not None and operator_norm(cur - prev) <= tol:
            return cur
        prev_prev, prev = prev, cur
    raise ConvergenceError(
        f"{f.label}: extension did not settle after {max_halvings} halvings",
        iterates=(prev_prev, prev),
    )


def parallel_sum(A, B):
    """``A : B = (A^{-1} + B^{-1})^{-1}``, computed as ``A (A + B)^{-1} B``."""
    A = as_spd(A, "A")
    B = as_spd(B, "B")
    return _sym(A @ np.linalg.solve(A + B, B))


def geometric_mean(A, B):
    """
    ``A # B`` through the Cholesky factor ``A = L L^T``:
    ``L (L^{-1} B L^{-T})^{1/2} L^T``.

    Independent of the symmetric square roots used by :func:`connection_eval`.
    """
    A = as_spd(A, "A")
    B = as_spd(B, "B")
    L = np.linalg.cholesky(A)
    Linv_B = np.linalg.solve(L, B)
    C = _sym(np.linalg.solve(L, Linv_B.T))
    S = apply_fn(C, np.sqrt, at_zero=0.0)
    return _sym(L @ S @ L.T)
