"""Dense Hermitian matrices and a full-spectrum eigensolver.

Two routes are available: a cyclic Jacobi iteration with complex rotations
(the default for single matrices) and LAPACK ``heevd`` through numpy, which the
band scanner uses for batched evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 50
_TINY = np.finfo(float).tiny


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Hermitian matrix built from the upper triangle of ``entries``."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")
        upper = np.triu(a, 1)
        h = upper + upper.conj().T + np.diag(a.diagonal().real)
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self.entries + other.entries)

    def is_real(self) -> bool:
        return not np.any(self.entries.imag)


@dataclass(frozen=True, eq=False)
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray | None = None

    def __len__(self):
        return len(self.values)


def _as_array(a) -> np.ndarray:
    if isinstance(a, HermitianMatrix):
        return a.entries
    return HermitianMatrix(a).entries


def jacobi_eigh(a, want_vectors: bool = False, tol: float = JACOBI_TOL,
                max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray | None]:
    """Cyclic Jacobi for a Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary, then applies the usual real rotation.  Stops once the
    off-diagonal Frobenius norm is at most ``tol * ||a||_F``; more than
    ``max_sweeps`` sweeps raises ``ConvergenceError``.
    """
    A = np.array(a, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex) if want_vectors else None
    norm = np.linalg.norm(A)
    target = tol * norm
    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= target:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                g = abs(apq)
                if g < _TINY:
                    # subnormal pivots would overflow the phase; dropping them is below rounding
                    A[p, q] = A[q, p] = 0.0
                    continue
                phase = complex(apq.real / g, apq.imag / g)
                app, aqq = A[p, p].real, A[q, q].real
                diff = aqq - app
                if abs(diff) * 1e-36 > g:
                    t = g / diff
                else:
                    theta = diff / (2.0 * g)
                    t = 1.0 / (abs(theta) + math.hypot(1.0, theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # U = diag-phase times real rotation; A <- U^H A U
                col_p = A[:, p].copy()
                col_q = A[:, q] * phase.conjugate()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :] * phase
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                A[p, p] = app - t * g
                A[q, q] = aqq + t * g
                if V is not None:
                    vp = V[:, p].copy()
                    vq = V[:, q] * phase.conjugate()
                    V[:, p] = c * vp - s * vq
                    V[:, q] = s * vp + c * vq
    values = A.diagonal().real.copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    if V is not None:
        V = V[:, order]
    return values, V


def eigen(a, want_vectors: bool = False, method: str = "jacobi") -> Spectrum:
    """Eigenvalues (nondecreasing, with multiplicity) and optionally orthonormal eigenvectors."""
    A = _as_array(a)
    if A.shape[0] == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0), dtype=complex) if want_vectors else None)
    if method == "jacobi":
        values, vectors = jacobi_eigh(A, want_vectors)
    elif method == "lapack":
        if want_vectors:
            values, vectors = np.linalg.eigh(A)
        else:
            values, vectors = np.linalg.eigvalsh(A), None
    else:
        raise ValueError(f"unknown eigen method {method!r}")
    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    return Spectrum(values, vectors)


def weyl_check(a, b, tol: float = 1e-9, method: str = "jacobi") -> bool:
    """Check lambda_n(A) + lambda_1(B) <= lambda_n(A+B) <= lambda_n(A) + lambda_max(B) for every n."""
    A, B = _as_array(a), _as_array(b)
    if A.shape != B.shape:
        raise ValueError(f"order mismatch: {A.shape[0]} vs {B.shape[0]}")
    if A.shape[0] == 0:
        return True
    la = eigen(A, method=method).values
    lb = eigen(B, method=method).values
    lab = eigen(A + B, method=method).values
    return bool(np.all(la + lb[0] <= lab + tol) and np.all(lab <= la + lb[-1] + tol))


def residuals(a, spectrum: Spectrum) -> np.ndarray:
    """Per-pair residual norms ||A v - lambda v||_2."""
    A = _as_array(a)
    V = spectrum.vectors
    return np.linalg.norm(A @ V - V * spectrum.values[None, :], axis=0)
