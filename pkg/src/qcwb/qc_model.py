"""The quadratic matrix relation system on triples (h, x, k).

A triple of n x n matrices is an exact representation when

    h*h + x*x = h,    k*k + x x* = k,    k x = x h,    h k = 0.

Equivalently (when h and k are Hermitian): h k = 0 and the 2n x 2n block
matrix T(h, x, k) = [[1 - h, x*], [x, k]] is a self-adjoint idempotent.  A
weaker system only asks h k = 0 and 0 <= T <= 1.  This module builds T,
measures residuals of all three relation sets, constructs the canonical
block-diagonal representations over a grid, and factors x through eighth
roots of h and k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_PROFILE,
    DimMismatch,
    NotHermitian,
    ToleranceProfile,
    _eigh_raw,
    frac_power,
    hermitian_part,
    op_norm,
    pseudo_solve,
)

__all__ = [
    "QcTriple",
    "FactorizationResidualTooLarge",
    "t_matrix",
    "low_level_residuals",
    "high_level_residuals",
    "positivity_residuals",
    "canonical_generators",
    "canonical_fiber",
    "factor_x",
    "LOW_LEVEL_LABELS",
]


class FactorizationResidualTooLarge(RuntimeError):
    """x could not be recovered from the k-h corner sandwich."""


LOW_LEVEL_LABELS = ("h_quadratic", "k_quadratic", "intertwiner", "orthogonality")


@dataclass(frozen=True)
class QcTriple:
    """An ordered triple of same-size complex matrices."""

    h: np.ndarray
    x: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        x = np.asarray(self.x, dtype=complex)
        k = np.asarray(self.k, dtype=complex)
        for name, m in (("h", h), ("x", x), ("k", k)):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimMismatch(f"{name} must be square, got shape {m.shape}")
        if not (h.shape == x.shape == k.shape):
            raise DimMismatch(
                f"components differ in size: {h.shape}, {x.shape}, {k.shape}"
            )
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "k", k)

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    def direct_sum(self, other: "QcTriple") -> "QcTriple":
        def dsum(a, b):
            n, m = a.shape[0], b.shape[0]
            out = np.zeros((n + m, n + m), dtype=complex)
            out[:n, :n] = a
            out[n:, n:] = b
            return out

        return QcTriple(
            dsum(self.h, other.h), dsum(self.x, other.x), dsum(self.k, other.k)
        )

    def norms(self, profile: ToleranceProfile = DEFAULT_PROFILE) -> dict[str, float]:
        return {
            "h": op_norm(self.h, profile),
            "x": op_norm(self.x, profile),
            "k": op_norm(self.k, profile),
        }


def t_matrix(
    triple: QcTriple,
    profile: ToleranceProfile = DEFAULT_PROFILE,
    check_hermitian: bool = True,
) -> np.ndarray:
    """The 2n x 2n block matrix [[1 - h, x*], [x, k]].

    With Hermitian h, k this is self-adjoint; ``check_hermitian=False`` skips
    the precondition for residual sweeps over arbitrary triples.
    """
    h, x, k = triple.h, triple.x, triple.k
    if check_hermitian:
        for name, m in (("h", h), ("k", k)):
            defect = op_norm(m - m.conj().T, profile)
            if defect > profile.hermitian_tol * max(1.0, op_norm(m, profile)):
                raise NotHermitian(f"{name} has hermitian defect {defect:.3e}")
    eye = np.eye(triple.dim, dtype=complex)
    return np.block([[eye - h, x.conj().T], [x, k]])


def low_level_residuals(
    triple: QcTriple, profile: ToleranceProfile = DEFAULT_PROFILE
) -> dict[str, float]:
    """Operator norms of the four defining relation defects."""
    h, x, k = triple.h, triple.x, triple.k
    return {
        "h_quadratic": op_norm(h.conj().T @ h + x.conj().T @ x - h, profile),
        "k_quadratic": op_norm(k.conj().T @ k + x @ x.conj().T - k, profile),
        "intertwiner": op_norm(k @ x - x @ h, profile),
        "orthogonality": op_norm(h @ k, profile),
    }


def high_level_residuals(
    triple: QcTriple, profile: ToleranceProfile = DEFAULT_PROFILE
) -> dict[str, float]:
    """Residuals of the block form: orthogonality, idempotency, self-adjointness."""
    t = t_matrix(triple, profile, check_hermitian=False)
    return {
        "orthogonality": op_norm(triple.h @ triple.k, profile),
        "idempotent": op_norm(t @ t - t, profile),
        "self_adjoint": op_norm(t.conj().T - t, profile),
    }


def positivity_residuals(
    triple: QcTriple, profile: ToleranceProfile = DEFAULT_PROFILE
) -> dict[str, float]:
    """Residuals of the weak system: orthogonality plus 0 <= T <= 1."""
    t = t_matrix(triple, profile)
    w = _eigh_raw(t, profile).eigenvalues
    return {
        "orthogonality": op_norm(triple.h @ triple.k, profile),
        "below_zero": max(0.0, -float(w[0])),
        "above_one": max(0.0, float(w[-1]) - 1.0),
    }


def canonical_fiber(t: float) -> QcTriple:
    """The 2x2 model representation at parameter t in (0, 1]."""
    e11 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    e22 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    e21 = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    return QcTriple(t * e11, np.sqrt(t - t * t) * e21, t * e22)


def canonical_generators(m: int) -> QcTriple:
    """Block-diagonal exact representation over the grid t_i = i/m, i = 1..m.

    Each 2x2 fiber is (t e11, sqrt(t - t^2) e21, t e22); the total dimension
    is 2m.  The grid uses right endpoints so t = 1 (the diagonal fiber) is
    always present and t = 0 (where everything vanishes) never is.
    """
    if m < 1:
        raise ValueError(f"grid size must be >= 1, got {m}")
    ts = np.arange(1, m + 1, dtype=float) / m
    e11 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    e22 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    e21 = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    h = np.kron(np.diag(ts), e11)
    k = np.kron(np.diag(ts), e22)
    x = np.kron(np.diag(np.sqrt(ts - ts * ts)), e21)
    return QcTriple(h, x, k)


def factor_x(
    triple: QcTriple,
    profile: ToleranceProfile = DEFAULT_PROFILE,
    pre_tol: float = 1e-8,
    reconstruction_tol: float = 1e-7,
    check_pre: bool = True,
) -> np.ndarray:
    """Factor x = k^(1/8) y h^(1/8), returning the minimum-norm y.

    Requires the weak relation residuals to be below ``pre_tol`` (so x lives
    in the k-h corner up to tolerance); ``check_pre=False`` skips that gate
    and relies on the reconstruction bound alone.  Raises
    :class:`FactorizationResidualTooLarge` when the sandwich cannot reproduce
    x to ``reconstruction_tol * max(1, ||x||)``.
    """
    if check_pre:
        res = positivity_residuals(triple, profile)
        worst = max(res.values())
        if worst > pre_tol:
            raise ValueError(
                f"triple violates the corner relations (residual {worst:.3e} > {pre_tol:.0e})"
            )
    h8 = frac_power(hermitian_part(triple.h), 0.125, profile)
    k8 = frac_power(hermitian_part(triple.k), 0.125, profile)
    y = pseudo_solve(k8, h8, triple.x, profile)
    recon = op_norm(k8 @ y @ h8 - triple.x, profile)
    bound = reconstruction_tol * max(1.0, op_norm(triple.x, profile))
    if recon > bound:
        raise FactorizationResidualTooLarge(
            f"corner sandwich misses x by {recon:.3e} (allowed {bound:.3e})"
        )
    return y
