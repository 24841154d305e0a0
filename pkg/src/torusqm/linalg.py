"""Dense complex linear algebra used by the rest of the package.

Matrices are plain ``numpy`` complex arrays. The helpers here pin down the
conventions (DFT sign and normalisation, eigenvalue ordering, the basis chosen
inside degenerate eigenspaces) so that every caller sees the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

MAX_SWEEPS = 100


class EigenNoConvergence(np.linalg.LinAlgError):
    """Raised when the Jacobi iteration exhausts its sweep budget."""

    def __init__(self, sweeps: int, residual: float):
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {residual:.3e})"
        )
        self.sweeps = sweeps
        self.residual = residual


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_defect(a: np.ndarray) -> float:
    """max |A_ij - conj(A_ji)| relative to max |A| (0 for the zero matrix)."""
    a = as_matrix(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)) / scale)


def unitarity_defect(a: np.ndarray) -> float:
    a = as_matrix(a)
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))


def is_hermitian(a, tol: float = 1e-12) -> bool:
    return hermiticity_defect(a) <= tol


def is_unitary(a, tol: float = 1e-10) -> bool:
    return unitarity_defect(a) <= tol


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


# --------------------------------------------------------------------------
# Hermitian eigenproblem


def _jacobi(h: np.ndarray, max_sweeps: int = MAX_SWEEPS):
    """Cyclic complex Jacobi; returns unsorted (eigenvalues, eigenvectors)."""
    a = np.array(h, dtype=complex, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v

    def off_norm():
        return np.sqrt(max(np.linalg.norm(a) ** 2 - np.linalg.norm(np.diag(a)) ** 2, 0.0))

    threshold = 1e-15 * scale
    for sweep in range(max_sweeps):
        if off_norm() <= threshold:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag <= 1e-300 or mag <= 1e-18 * scale:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = 1.0 / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau < 0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ph = b / mag
                # R = diag(1, conj(ph)) @ [[c, s], [-s, c]]
                rot = np.array([[c, s], [-s * ph.conjugate(), c * ph.conjugate()]])
                cols = a[:, [p, q]] @ rot
                a[:, p] = cols[:, 0]
                a[:, q] = cols[:, 1]
                rows = rot.conj().T @ a[[p, q], :]
                a[p, :] = rows[0]
                a[q, :] = rows[1]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vc = v[:, [p, q]] @ rot
                v[:, p] = vc[:, 0]
                v[:, q] = vc[:, 1]
    residual = off_norm()
    if residual <= threshold:
        return np.real(np.diag(a)).copy(), v
    raise EigenNoConvergence(max_sweeps, residual)


def _canonical_subspace(q: np.ndarray) -> np.ndarray:
    """Basis-independent orthonormal basis for span(q).

    Pivoted Gram-Schmidt on the columns of the projector q q^H: the pivot is
    the column with the largest remaining norm, lowest index on ties.
    """
    m = q.shape[1]
    proj = q @ q.conj().T
    basis = []
    work = proj.copy()
    for _ in range(m):
        norms = np.linalg.norm(work, axis=0)
        i = int(np.argmax(norms))
        vec = work[:, i] / norms[i]
        # one re-orthogonalisation pass keeps the basis orthonormal to 1e-15
        for b in basis:
            vec = vec - b * np.vdot(b, vec)
        vec = vec / np.linalg.norm(vec)
        basis.append(vec)
        work = work - np.outer(vec, vec.conj() @ work)
    return np.column_stack(basis)


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.round(np.abs(vec), 12)))
    return vec * (abs(vec[i]) / vec[i])


def eigh(h, method: str = "lapack", degeneracy_tol: float = 1e-11) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    ``method`` is ``"lapack"`` (numpy) or ``"jacobi"`` (cyclic Jacobi, at most
    ``MAX_SWEEPS`` sweeps). Either way the result is post-processed the same
    way: eigenvalues ascending, degenerate clusters (gaps below
    ``degeneracy_tol * max(1, max|h|)``) given a canonical basis, and each
    eigenvector's phase fixed so its largest entry is real positive.
    """
    h = as_matrix(h)
    if hermiticity_defect(h) > 1e-12:
        raise ValueError("eigh requires a Hermitian matrix")
    h = 0.5 * (h + h.conj().T)
    if method == "lapack":
        w, v = np.linalg.eigh(h)
    elif method == "jacobi":
        w, v = _jacobi(h)
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")

    order = np.argsort(w, kind="stable")
    w = np.asarray(w[order], dtype=float)
    v = np.asarray(v[:, order], dtype=complex)

    n = w.shape[0]
    scale = max(1.0, float(np.max(np.abs(h)))) if n else 1.0
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] <= degeneracy_tol * scale:
            stop += 1
        if stop - start > 1:
            v[:, start:stop] = _canonical_subspace(v[:, start:stop])
        start = stop
    for col in range(n):
        v[:, col] = _fix_phase(v[:, col])
    return EigenSystem(_frozen(w), _frozen(v))


# --------------------------------------------------------------------------
# Discrete Fourier transform


def dft(v, direction: str = "forward", method: str = "fft") -> np.ndarray:
    """Unitary DFT, ``d_k = N^{-1/2} sum_j c_j exp(-2 pi i j k / N)`` forward.

    The inverse is the adjoint. ``method="direct"`` evaluates the O(N^2) sum
    explicitly and is kept as a cross-check of the FFT path.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ValueError("dft expects a vector")
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    n = v.shape[0]
    if method == "fft":
        if direction == "forward":
            return np.fft.fft(v, norm="ortho")
        return np.fft.ifft(v, norm="ortho")
    if method == "direct":
        jk = np.outer(np.arange(n), np.arange(n)) % n
        sign = -1.0 if direction == "forward" else 1.0
        kernel = np.exp(sign * 2j * np.pi * jk / n) / np.sqrt(n)
        return kernel @ v
    raise ValueError(f"unknown dft method {method!r}")


def spectral_apply(
    h,
    f: Callable[[np.ndarray], np.ndarray],
    v,
    spectrum: EigenSystem | None = None,
) -> np.ndarray:
    """Return ``V f(Lambda) V^H v`` for Hermitian ``h``.

    Pass a precomputed ``spectrum`` to skip the diagonalisation (``h`` may then
    be ``None``).
    """
    if spectrum is None:
        spectrum = eigh(h)
    v = np.asarray(v, dtype=complex)
    if v.shape != (spectrum.dim,):
        raise ValueError(f"vector of length {v.shape} does not match dimension {spectrum.dim}")
    vecs = spectrum.eigenvectors
    weights = np.asarray(f(spectrum.eigenvalues), dtype=complex)
    return vecs @ (weights * (vecs.conj().T @ v))
