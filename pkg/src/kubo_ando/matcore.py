"""
Dense real-symmetric matrix kernel.

Everything spectral goes through one primitive, :func:`sym_eig`: matrix
functions, spectral projections, norms and order tests are all read off the
same eigendecomposition, so they are mutually consistent to rounding.

Matrices are plain ``float64`` numpy arrays. Most routines accept a stack of
matrices with shape ``(..., n, n)`` and broadcast over the leading axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BoundaryAmbiguityError, DomainError, InputError

MAX_DIM = 256
ASYMMETRY_RTOL = 1e-12
TAU_PD = 1e-12
BOUNDARY_GAP = 1e-8


def _sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def symmetrize(M, name="matrix"):
    """
    Validate a (stack of) square matrices and return the symmetric part.

    The asymmetry defect ``max|M - M^T|`` must not exceed
    ``1e-12 * max|M|``; larger defects mean the caller passed a genuinely
    non-symmetric matrix and an :class:`InputError` is raised.
    """
    M = np.array(M, dtype=float)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise InputError(f"{name} must be square, got shape {M.shape}")
    n = M.shape[-1]
    if n < 1 or n > MAX_DIM:
        raise InputError(f"{name} dimension {n} outside [1, {MAX_DIM}]")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    defect = np.max(np.abs(M - np.swapaxes(M, -1, -2)), initial=0.0)
    scale = np.max(np.abs(M), initial=0.0)
    if defect > ASYMMETRY_RTOL * scale:
        raise InputError(f"{name} is not symmetric (defect {defect:.3e})")
    S = _sym(M)
    S.setflags(write=False)
    return S


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order and the orthogonal matrix of eigenvectors."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self):
        return _sym((self.basis * self.eigenvalues[..., None, :]) @ np.swapaxes(self.basis, -1, -2))

    def with_values(self, values):
        """Return ``Q diag(values) Q^T`` for the stored basis."""
        Q = self.basis
        return _sym((Q * values[..., None, :]) @ np.swapaxes(Q, -1, -2))


def sym_eig(M):
    M = symmetrize(M)
    w, Q = np.linalg.eigh(M)
    return SpectralDecomposition(w, Q)


def operator_norm(M):
    """Spectral norm ``max |lambda_i|`` of a symmetric matrix (or stack)."""
    w = np.linalg.eigvalsh(np.asarray(M, dtype=float))
    return np.max(np.abs(w), axis=-1)


def tau_psd(M):
    """Scale-aware PSD tolerance ``1e-9 * (1 + ||M||)``."""
    return 1e-9 * (1.0 + operator_norm(M))


def is_psd(M):
    w = np.linalg.eigvalsh(np.asarray(M, dtype=float))
    return w[..., 0] >= -1e-9 * (1.0 + np.max(np.abs(w), axis=-1))


def is_pd(M):
    w = np.linalg.eigvalsh(np.asarray(M, dtype=float))
    return w[..., 0] >= TAU_PD


def as_psd(M, name="matrix"):
    S = symmetrize(M, name)
    if not np.all(is_psd(S)):
        raise InputError(f"{name} is not positive semidefinite")
    return S


def as_spd(M, name="matrix"):
    S = symmetrize(M, name)
    if not np.all(is_pd(S)):
        raise InputError(f"{name} is not positive definite")
    return S


def apply_fn(M, phi: Callable, at_zero=None, zero_tol=None):
    """
    Functional calculus ``Q diag(phi(lambda)) Q^T``.

    Parameters
    ----------
    M : array_like, shape (..., n, n)
        Symmetric matrix or stack of them.
    phi : callable
        Vectorized scalar function applied to the eigenvalues.
    at_zero : float, optional
        Right-limit ``phi(0+)``. When given, eigenvalues within ``zero_tol``
        of zero are treated as exactly zero and mapped to this value instead
        of being passed to ``phi``.
    zero_tol : float or array, optional
        Defaults to ``tau_psd(M)``; one value per matrix for stacks.

    Raises
    ------
    DomainError
        If ``phi`` produces a non-finite value on some eigenvalue.
    """
    dec = sym_eig(M)
    w = dec.eigenvalues
    if at_zero is None:
        with np.errstate(all="ignore"):
            values = np.asarray(phi(w), dtype=float)
    else:
        if zero_tol is None:
            tau = 1e-9 * (1.0 + np.max(np.abs(w), axis=-1, keepdims=True))
        else:
            tau = np.asarray(zero_tol, dtype=float)[..., None]
        zero = np.abs(w) <= tau
        safe = np.where(zero, 1.0, w)
        with np.errstate(all="ignore"):
            values = np.where(zero, float(at_zero), np.asarray(phi(safe), dtype=float))
    values = np.broadcast_to(values, w.shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        lam = w[bad].flat[0]
        raise DomainError(f"function undefined at eigenvalue {lam!r}")
    return dec.with_values(values)


def loewner_leq(A, B, tol=0.0):
    """True iff ``lambda_min(B - A) >= -tol``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[-2:] != B.shape[-2:]:
        raise InputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    w = np.linalg.eigvalsh(_sym(B - A))
    return w[..., 0] >= -np.asarray(tol)


@dataclass(frozen=True)
class Interval:
    """A real interval with optional infinite endpoints; open by default."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above & below

    def endpoints(self):
        return tuple(e for e in (self.lo, self.hi) if math.isfinite(e))

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


def below(c):
    """The open half-line ``(-inf, c)``."""
    return Interval(-math.inf, c)


def spectral_projection(M, interval: Interval, dec: SpectralDecomposition | None = None):
    """
    Orthogonal projection onto the eigenvectors of ``M`` whose eigenvalues
    lie in ``interval``.

    Raises :class:`BoundaryAmbiguityError` if an endpoint is within 1e-8 of an
    eigenvalue; pick a different endpoint rather than guessing a side.
    """
    if dec is None:
        dec = sym_eig(M)
    w, Q = dec.eigenvalues, dec.basis
    for e in interval.endpoints():
        gap = np.min(np.abs(w - e))
        if gap <= BOUNDARY_GAP:
            raise BoundaryAmbiguityError(
                f"interval endpoint {e!r} is within {gap:.2e} of an eigenvalue"
            )
    mask = interval.contains(w)
    V = Q[:, mask]
    P = _sym(V @ V.T)
    P.setflags(write=False)
    return P


def projection_rank(P):
    return int(round(float(np.trace(P))))


def is_projection(P, tol=1e-10):
    P = np.asarray(P, dtype=float)
    if np.max(np.abs(P @ P - P)) > tol:
        return False
    w = np.linalg.eigvalsh(_sym(P))
    return bool(np.all(np.minimum(np.abs(w), np.abs(w - 1.0)) <= tol))


def range_basis(P):
    """Orthonormal basis (columns) of the range of a projection."""
    w, Q = np.linalg.eigh(_sym(np.asarray(P, dtype=float)))
    return Q[:, w > 0.5]


def compression_max_lambda(A, P):
    """
    ``max{lambda >= 0 : lambda P <= PAP}`` for PSD ``A`` and a nonzero
    projection ``P``: the smallest eigenvalue of ``A`` compressed to the range
    of ``P``, clipped at zero.
    """
    U = range_basis(P)
    if U.shape[1] == 0:
        raise InputError("compression onto the zero projection")
    lam = np.linalg.eigvalsh(_sym(U.T @ np.asarray(A, dtype=float) @ U))[0]
    return max(float(lam), 0.0)


def matrix_to_json(M):
    M = np.asarray(M, dtype=float)
    return {"n": int(M.shape[0]), "entries": [float(x) for x in M.ravel()]}


def matrix_from_json(obj):
    try:
        n = int(obj["n"])
        entries = np.asarray(obj["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad matrix JSON: {exc}") from None
    if entries.size != n * n:
        raise InputError(f"expected {n * n} entries, got {entries.size}")
    return symmetrize(entries.reshape(n, n))
