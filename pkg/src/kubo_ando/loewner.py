"""
Measure-side representation of operator monotone functions.

A finite positive measure ``m`` on ``[0, inf]`` is stored as two atoms (at
``0`` and at ``inf``) plus finitely many weighted nodes in ``(0, inf)``. It
determines

    f(x) = m({0}) + x m({inf}) + sum_i w_i x (1 + t_i) / (x + t_i)

and the connection

    A sigma B = m({0}) A + m({inf}) B + sum_i w_i (1 + t_i)/t_i (t_i A : B).

Continuous measures enter as quadrature node lists and carry
``quadrature=True``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BoundaryAmbiguityError, DomainError, InconsistencyError, InputError
from .matcore import Interval, _sym, as_spd
from .means import STANDARD_GRID, RepresentingFunction

EXACT_RTOL = 1e-9
QUADRATURE_RTOL = 1e-6


@dataclass(frozen=True)
class BorelMeasure:
    atom0: float = 0.0
    atom_inf: float = 0.0
    t: np.ndarray = field(default_factory=lambda: np.empty(0))
    w: np.ndarray = field(default_factory=lambda: np.empty(0))
    quadrature: bool = False
    # only the atom-free part of an atoms-only measure may be empty
    allow_empty: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).ravel()
        w = np.asarray(self.w, dtype=float).ravel()
        if t.shape != w.shape:
            raise InputError("node and weight arrays differ in length")
        if self.atom0 < 0 or self.atom_inf < 0 or np.any(w <= 0):
            raise InputError("measure weights must be nonnegative (node weights positive)")
        if np.any(~np.isfinite(t)) or np.any(t <= 0):
            raise InputError("nodes must be finite and strictly positive")
        if np.unique(t).size != t.size:
            raise InputError("nodes must be distinct")
        mass = self.atom0 + self.atom_inf + float(np.sum(w))
        if not math.isfinite(mass) or mass < 0 or (mass == 0 and not self.allow_empty):
            raise InputError("total mass must be finite and positive")
        order = np.argsort(t)
        object.__setattr__(self, "t", t[order])
        object.__setattr__(self, "w", w[order])
        self.t.setflags(write=False)
        self.w.setflags(write=False)

    @property
    def total_mass(self):
        return float(self.atom0 + self.atom_inf + np.sum(self.w))

    @property
    def nodes(self):
        return list(zip(self.t.tolist(), self.w.tolist()))

    def interior_moment(self):
        """``gamma = integral over (0, inf) of (1 + t) dm``."""
        return float(np.sum(self.w * (1.0 + self.t)))

    def without_atoms(self):
        return BorelMeasure(0.0, 0.0, self.t, self.w, self.quadrature, allow_empty=True)

    def to_json(self):
        return {
            "atom0": float(self.atom0),
            "atomInf": float(self.atom_inf),
            "nodes": [[float(a), float(b)] for a, b in zip(self.t, self.w)],
            "quadrature": bool(self.quadrature),
        }

    @classmethod
    def from_json(cls, obj):
        try:
            nodes = np.asarray(obj.get("nodes", []), dtype=float).reshape(-1, 2)
            return cls(
                float(obj.get("atom0", 0.0)),
                float(obj.get("atomInf", 0.0)),
                nodes[:, 0],
                nodes[:, 1],
                bool(obj.get("quadrature", False)),
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"bad measure JSON: {exc}") from None


def dirac(point, weight=1.0):
    """Point mass; ``point`` may be ``0`` or ``math.inf``."""
    if point == 0:
        return BorelMeasure(atom0=weight)
    if point == math.inf:
        return BorelMeasure(atom_inf=weight)
    return BorelMeasure(t=[point], w=[weight])


def combine(weights: Sequence[float], measures: Sequence[BorelMeasure]) -> BorelMeasure:
    """``sum c_k m_k``; coincident nodes are merged."""
    atom0 = sum(c * m.atom0 for c, m in zip(weights, measures))
    atom_inf = sum(c * m.atom_inf for c, m in zip(weights, measures))
    t = np.concatenate([m.t for m in measures] + [np.empty(0)])
    w = np.concatenate([c * m.w for c, m in zip(weights, measures)] + [np.empty(0)])
    keep = w > 0
    t, w = t[keep], w[keep]
    ut, inv = np.unique(t, return_inverse=True)
    uw = np.zeros_like(ut)
    np.add.at(uw, inv, w)
    return BorelMeasure(atom0, atom_inf, ut, uw, any(m.quadrature for m in measures))


def arithmetic_measure():
    return BorelMeasure(atom0=0.5, atom_inf=0.5)


def harmonic_measure():
    return dirac(1.0)


def geometric_measure(step=0.25, half_width=64.0):
    """
    Quadrature nodes for the measure of ``sqrt``.

    The measure has density ``t^{-1/2} / (pi (1 + t))``. Under ``t = e^y`` it
    becomes ``dy / (2 pi cosh(y/2))``, and the integrand
    ``x (1 + t)/(x + t)`` is analytic in a strip of half-width ``pi`` for
    every ``x > 0``, so the trapezoidal rule converges geometrically and
    uniformly in ``x``. Truncation at ``|y| = half_width`` drops mass of
    order ``exp(-half_width / 2)``.
    """
    k = np.arange(-int(half_width / step), int(half_width / step) + 1)
    y = k * step
    return BorelMeasure(t=np.exp(y), w=step / (2.0 * np.pi * np.cosh(y / 2.0)), quadrature=True)


def quadrature_measure(density: Callable, n=64, atom0=0.0, atom_inf=0.0):
    """
    Discretize ``density(t) dt`` on ``(0, inf)`` with ``t = u / (1 - u)`` and
    ``n``-point Gauss-Legendre on ``(0, 1)``.
    """
    x, wts = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    t = u / (1.0 - u)
    w = 0.5 * wts * density(t) / (1.0 - u) ** 2
    keep = w > 0
    return BorelMeasure(atom0, atom_inf, t[keep], w[keep], quadrature=True)


def measure_eval_fn(m: BorelMeasure, x):
    """``f(x) = integral over [0, inf] of x (1 + t)/(x + t) dm(t)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("measure function is defined for x > 0 only")
    out = m.atom0 + m.atom_inf * x
    if m.t.size:
        xs = x[..., None]
        out = out + np.sum(m.w * (xs * (1.0 + m.t)) / (xs + m.t), axis=-1)
    return out if np.ndim(out) else float(out)


def _in_delta(point, intervals):
    return any(bool(iv.contains(point)) for iv in intervals)


def restricted_fn(m: BorelMeasure, intervals: Sequence[Interval]) -> Callable:
    """
    ``f_Delta(x) = integral over Delta of x (1 + t)/(x + t) dm(t)`` with
    ``Delta`` a union of intervals in ``[0, inf]``.

    For quadrature measures a node sitting on an interval endpoint stands for
    mass on both sides, so that case is rejected.
    """
    intervals = list(intervals)
    if m.quadrature:
        for iv in intervals:
            for e in iv.endpoints():
                if np.any(np.isclose(m.t, e, rtol=1e-12, atol=0)):
                    raise BoundaryAmbiguityError(f"endpoint {e!r} splits a quadrature node")
    keep = np.array([_in_delta(t, intervals) for t in m.t], dtype=bool)
    a0 = m.atom0 if _in_delta(0.0, intervals) else 0.0
    ainf = m.atom_inf if _in_delta(math.inf, intervals) else 0.0
    t, w = m.t[keep], m.w[keep]

    def f_delta(x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError("restricted function is defined for x > 0 only")
        out = a0 + ainf * x
        if t.size:
            xs = x[..., None]
            out = out + np.sum(w * (xs * (1.0 + t)) / (xs + t), axis=-1)
        return out + 0.0 * x

    return f_delta


def measure_connection_eval(m: BorelMeasure, A, B):
    """
    ``m({0}) A + m({inf}) B + sum_i w_i (1 + t_i)/t_i (t_i A : B)``.

    Each parallel sum is formed as ``(1 + t) A (t A + B)^{-1} B``, which is
    the same quantity with the ``1/t`` absorbed.
    """
    A = as_spd(A, "A")
    B = as_spd(B, "B")
    if A.shape != B.shape:
        raise InputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    out = m.atom0 * A + m.atom_inf * B
    if m.t.size:
        t = m.t[:, None, None]
        S = np.linalg.solve(t * A + B, np.broadcast_to(B, (m.t.size,) + B.shape))
        terms = (m.w * (1.0 + m.t))[:, None, None] * (A @ S)
        out = out + terms.sum(axis=0)
    return _sym(out)


def function_from_measure(m: BorelMeasure, label="measure") -> RepresentingFunction:
    return RepresentingFunction(
        lambda x: measure_eval_fn(m, x), float(m.atom0), float(m.atom_inf), label=label
    )


def _agreement_rtol(m):
    return QUADRATURE_RTOL if m.quadrature else EXACT_RTOL


def check_measure_matches(f: RepresentingFunction, m: BorelMeasure, grid=STANDARD_GRID):
    """Raise :class:`InconsistencyError` unless ``m`` reproduces ``f`` on the grid."""
    fx = f(grid)
    mx = measure_eval_fn(m, grid)
    err = np.max(np.abs(fx - mx) / (1.0 + np.abs(fx)))
    if err > _agreement_rtol(m):
        raise InconsistencyError(f"{f.label}: measure disagrees with function (rel {err:.2e})")
    return float(err)


@dataclass(frozen=True)
class HSplit:
    """``f = alpha + beta x + h`` with ``h`` carried by ``m`` restricted to ``(0, inf)``."""

    alpha: float
    beta: float
    h: RepresentingFunction
    m_h: BorelMeasure


def split_h(f: RepresentingFunction, m: BorelMeasure) -> HSplit:
    check_measure_matches(f, m)
    alpha, beta = float(m.atom0), float(m.atom_inf)
    g = f.func

    def h(x):
        gx = g(x)
        out = gx - alpha - beta * x
        # cancellation leaves rounding-level residue where h vanishes
        floor = 64 * np.finfo(float).eps * (np.abs(gx) + alpha + beta * np.abs(x))
        return np.where(np.abs(out) <= floor, 0.0, out)

    hx = h(STANDARD_GRID)
    if np.any(hx < -1e-10 * (1.0 + np.abs(g(STANDARD_GRID)))):
        raise InconsistencyError(f"{f.label}: h = f - alpha - beta x is negative")
    hfn = RepresentingFunction(h, 0.0, 0.0, label=f"h({f.label})", strict=False)
    return HSplit(alpha, beta, hfn, m.without_atoms())


def symmetry_integrals(m: BorelMeasure):
    """
    ``(integral t dm, integral 1/t dm)`` over ``[0, inf]`` as extended reals.

    An atom at infinity makes the first infinite, an atom at zero the second.
    """
    i_t = math.inf if m.atom_inf > 0 else float(np.sum(m.w * m.t))
    i_tinv = math.inf if m.atom0 > 0 else float(np.sum(m.w / m.t))
    return i_t, i_tinv
