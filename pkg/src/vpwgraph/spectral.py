"""
Smallest eigenpairs of the graph Laplacian and Laplacian-eigenmap embeddings.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dataset import DataMatrix
from .errors import NumericError, ValidationError

DENSE_MAX = 2000
DENSE_FALLBACK_MAX = 8000
ARPACK_MAXITER = 1000
RESIDUAL_TOL = 1e-7
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[0]


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the first non-negligible entry of every column positive."""
    vecs = vecs.copy()
    for c in range(vecs.shape[1]):
        col = vecs[:, c]
        thresh = 1e-10 * np.abs(col).max()
        first = np.flatnonzero(np.abs(col) > thresh)
        if first.size and col[first[0]] < 0:
            vecs[:, c] = -col
    return vecs


def _norm_estimate(L) -> float:
    if sp.issparse(L):
        return float(abs(L).sum(axis=1).max())
    return float(np.abs(L).sum(axis=1).max())


def smallest_eigenpairs(L, k: int, dense_max: int = DENSE_MAX, seed: int = 0) -> Spectrum:
    """The k algebraically smallest eigenpairs of a symmetric matrix.

    Dense LAPACK for n <= ``dense_max``; otherwise ARPACK in shift-invert
    mode just below zero with a seeded start vector.
    """
    n = L.shape[0]
    if L.shape != (n, n):
        raise ValidationError("matrix must be square")
    if not 1 <= k <= n:
        raise ValidationError(f"k={k} must lie in [1, n={n}]")
    asym = abs(L - L.T).max() if sp.issparse(L) else np.abs(L - L.T).max()
    scale = max(_norm_estimate(L), 1e-300)
    if asym > SYMMETRY_TOL * max(scale, 1.0):
        raise ValidationError(f"matrix is not symmetric (max asymmetry {asym:.3g})")

    vals = vecs = None
    if n > dense_max and k < n - 1:
        # solve on L / ||L||: keeps the shift and ARPACK tolerance meaningful for tiny weights
        Ls = sp.csc_matrix(L, dtype=float) / scale
        v0 = np.random.default_rng(seed).standard_normal(n)
        try:
            vals, vecs = spla.eigsh(Ls, k=k, sigma=-1e-3, which="LM", v0=v0,
                                    tol=1e-12, maxiter=ARPACK_MAXITER)
        except (spla.ArpackNoConvergence, RuntimeError) as exc:
            if n > DENSE_FALLBACK_MAX:
                raise NumericError(f"eigensolver did not converge: {exc}") from None
            warnings.warn(f"ARPACK failed ({exc}); falling back to dense solver", RuntimeWarning,
                          stacklevel=2)
        else:
            order = np.argsort(vals)
            vecs, _ = np.linalg.qr(vecs[:, order])
            vals = np.einsum("ij,ij->j", vecs, Ls @ vecs) * scale
    if vals is None:
        A = L.toarray() if sp.issparse(L) else np.asarray(L, float)
        vals, vecs = scipy.linalg.eigh(A, subset_by_index=[0, k - 1])

    resid = np.linalg.norm(L @ vecs - vecs * vals, axis=0)
    worst = float(resid.max())
    if worst > RESIDUAL_TOL * max(scale, 1.0):
        raise NumericError(f"eigenpair residual {worst:.3g} exceeds tolerance")
    return Spectrum(eigenvalues=np.asarray(vals), eigenvectors=_fix_signs(np.asarray(vecs)))


def eigenmap_embed(spectrum: Spectrum, d_out: int) -> DataMatrix:
    """Drop the constant eigenvector and keep the next ``d_out`` as coordinates."""
    if d_out < 1:
        raise ValidationError("d_out must be >= 1")
    if spectrum.k < d_out + 1:
        raise ValidationError(f"spectrum has {spectrum.k} pairs; need {d_out + 1}")
    return DataMatrix(spectrum.eigenvectors[:, 1:d_out + 1])


def eigenvalue_report(spectra: Sequence[Tuple[str, Spectrum]], k: int) -> str:
    """CSV text: one row per named spectrum with its k smallest eigenvalues."""
    buf = io.StringIO()
    for name, spec in spectra:
        if spec.k < k:
            raise ValidationError(f"spectrum {name!r} has only {spec.k} eigenvalues")
        vals = ",".join(format(float(v), ".17g") for v in spec.eigenvalues[:k])
        buf.write(f"{name},{vals}\n")
    return buf.getvalue()
