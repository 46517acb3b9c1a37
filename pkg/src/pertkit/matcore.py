"""Dense complex linear-algebra substrate.

Matrices are plain ``numpy.ndarray`` objects with ``complex128`` entries.
This module provides the validated core every other module builds on:
spectral norm, guarded inverse, Hermitian eigendecomposition, matrix
exponential, and circular contour quadrature of analytic maps.

All functions are pure; inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ContourEnclosureError,
    MatrixFormatError,
    NotHermitianError,
    ShapeError,
    SingularMatrixError,
)

#: Relative smallest-singular-value threshold below which a matrix is
#: treated as singular.  All supported problems have well-separated spectra.
SINGULARITY_RTOL = 1e-13

HERMITICITY_RTOL = 1e-10


def as_matrix(m, square: bool = False) -> np.ndarray:
    """Validate and convert ``m`` to a 2-D complex128 array.

    Rejects NaN/Inf entries and, when ``square`` is set, non-square shapes.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise MatrixFormatError(f"expected a 2-D matrix, got shape {a.shape}")
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise MatrixFormatError("matrix contains non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if a.size < 1 or not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise MatrixFormatError("expected a finite, non-empty vector")
    return a


def op_norm(m) -> float:
    """Spectral norm (largest singular value) of a square matrix."""
    a = as_matrix(m, square=True)
    return float(np.linalg.norm(a, 2))


def herm_defect(m) -> float:
    """Spectral norm of the anti-Hermitian part, ``||M - M*||``."""
    a = as_matrix(m, square=True)
    return float(np.linalg.norm(a - a.conj().T, 2))


def require_hermitian(m, rtol: float = HERMITICITY_RTOL, what: str = "matrix") -> np.ndarray:
    a = as_matrix(m, square=True)
    scale = max(op_norm(a), 1e-300)
    if herm_defect(a) > rtol * scale:
        raise NotHermitianError(f"{what} is not Hermitian to relative {rtol:g}")
    return a


def inverse(m) -> np.ndarray:
    """Inverse of a square matrix, guarded against near-singularity.

    Raises :class:`SingularMatrixError` when the smallest singular value is
    below ``SINGULARITY_RTOL`` times the largest.
    """
    a = as_matrix(m, square=True)
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] < SINGULARITY_RTOL * max(s[0], 1e-300):
        raise SingularMatrixError(
            f"matrix singular to tolerance (sigma_min/sigma_max = {s[-1] / max(s[0], 1e-300):.3e})"
        )
    return np.linalg.solve(a, np.eye(a.shape[0], dtype=complex))


def solve(m, rhs) -> np.ndarray:
    """Guarded linear solve ``m @ x = rhs`` with the same singularity policy."""
    a = as_matrix(m, square=True)
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] < SINGULARITY_RTOL * max(s[0], 1e-300):
        raise SingularMatrixError("linear system singular to tolerance")
    return np.linalg.solve(a, np.asarray(rhs, dtype=complex))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending, real) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def vector(self, i: int) -> np.ndarray:
        return self.eigenvectors[:, i]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eig_hermitian(m) -> SpectralDecomposition:
    """Full eigendecomposition of a Hermitian matrix.

    The input is validated to be Hermitian to relative 1e-10; the returned
    eigenvalues are real and ascending, the eigenvectors orthonormal.
    """
    a = require_hermitian(m)
    w, v = np.linalg.eigh((a + a.conj().T) / 2.0)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def expm(m) -> np.ndarray:
    """Matrix exponential via scaling-and-squaring (Pade core)."""
    return scipy.linalg.expm(as_matrix(m, square=True))


@dataclass(frozen=True)
class ContourSpec:
    """A circle in the complex plane with equispaced quadrature nodes."""

    center: complex
    radius: float
    num_points: int = 256

    def __post_init__(self):
        if not (self.radius > 0):
            raise ValueError("contour radius must be positive")
        if self.num_points < 16:
            raise ValueError("contour needs at least 16 quadrature points")

    def nodes(self) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(self.num_points) / self.num_points
        return self.center + self.radius * np.exp(1j * theta)

    def with_points(self, n: int) -> "ContourSpec":
        return ContourSpec(self.center, self.radius, n)


def contour_integrate(f, c: ContourSpec):
    """Evaluate ``(1/2*pi*i) * closed integral of f(z) dz`` over the circle.

    Uses the trapezoid rule on equispaced nodes, which converges
    exponentially for integrands analytic in an annulus around the circle.
    With ``f(z) = g(z) (z - M)^{-1}`` and counterclockwise orientation this
    is the Cauchy/Riesz calculus: a simple pole at ``p`` inside contributes
    its residue, so e.g. ``f(z) = 1/(z - p)`` integrates to 1.

    ``f`` may return scalars or arrays; the result matches.
    """
    n = c.num_points
    theta = 2.0 * np.pi * np.arange(n) / n
    phases = np.exp(1j * theta)
    total = None
    for ph in phases:
        val = f(c.center + c.radius * ph)
        contrib = np.asarray(val, dtype=complex) * ph
        total = contrib if total is None else total + contrib
    total = total * (c.radius / n)
    if total.ndim == 0:
        return complex(total)
    return total


def contour_integrate_refined(f, c: ContourSpec):
    """Contour integral plus an a-posteriori error estimate.

    The estimate is the norm of the difference against a 2x-refined rule.
    Returns ``(value_at_2n, error_estimate)``.
    """
    coarse = contour_integrate(f, c)
    fine = contour_integrate(f, c.with_points(2 * c.num_points))
    err = np.linalg.norm(np.atleast_1d(np.asarray(fine - coarse)))
    return fine, float(err)


def enclosed_eigenvalue_count(eigenvalues, c: ContourSpec) -> int:
    """Number of (real) eigenvalues strictly inside the contour circle."""
    w = np.asarray(eigenvalues, dtype=float)
    return int(np.sum(np.abs(w - c.center) < c.radius))


def require_single_enclosure(eigenvalues, c: ContourSpec, target: float) -> None:
    """Check the contour encloses exactly one eigenvalue: the target.

    Raises :class:`ContourEnclosureError` otherwise, mirroring the winding
    number test ``(1/2*pi*i) * integral of Tr (z-A)^{-1} dz``.
    """
    count = enclosed_eigenvalue_count(eigenvalues, c)
    if count != 1:
        raise ContourEnclosureError(
            f"contour encloses {count} eigenvalues, expected exactly 1"
        )
    if not (abs(target - c.center) < c.radius):
        raise ContourEnclosureError("contour does not enclose the target eigenvalue")
