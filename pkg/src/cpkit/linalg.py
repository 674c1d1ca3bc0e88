"""Dense complex matrix kernels.

All functions take and return plain ``numpy`` arrays of dtype ``complex128``.
Tensor products follow the ``np.kron`` convention, so for a composite system
``S (x) E`` the row index of ``np.kron(a, b)`` is ``i * M + m`` with ``i`` the
system index.
"""

from typing import NamedTuple, Tuple

import numpy as np

from cpkit.errors import DimensionMismatch, NotHermitian

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9

_JACOBI_MAX_SWEEPS = 60


class HermEig(NamedTuple):
    """Spectral decomposition ``h = vectors @ diag(eigenvalues) @ vectors^*``."""

    eigenvalues: np.ndarray
    vectors: np.ndarray


def as_cmatrix(data, name: str = "matrix") -> np.ndarray:
    """Convert nested sequences to a 2-D complex array, rejecting ragged input."""
    try:
        arr = np.array(data, dtype=complex)
    except ValueError as exc:
        raise DimensionMismatch(f"{name}: malformed nested input ({exc})") from None
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name}: expected a 2-D matrix, got shape {arr.shape}")
    return arr


def _require_square(x: np.ndarray, name: str = "matrix") -> int:
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {x.shape}")
    return x.shape[0]


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(x).T


def max_abs(x) -> float:
    """Entrywise infinity norm, ``max |x_ij|`` (0 for empty input)."""
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def hermiticity_defect(x: np.ndarray) -> float:
    return max_abs(x - dagger(x))


def hs_inner(x: np.ndarray, y: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``Tr(x^* y)``, conjugate-linear in ``x``."""
    x = np.asarray(x)
    y = np.asarray(y)
    _require_square(x, "x")
    _require_square(y, "y")
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    return complex(np.vdot(x, y))


def partial_trace(x: np.ndarray, dims: Tuple[int, int], which: str = "second") -> np.ndarray:
    """Trace out one factor of a bipartite operator on ``C^N (x) C^M``.

    ``which="second"`` returns the ``N x N`` operator
    ``(Tr_2 x)_{ij} = sum_m x[(i,m), (j,m)]``; ``which="first"`` returns the
    ``M x M`` operator obtained by summing over the first factor.
    """
    x = np.asarray(x)
    n, m = dims
    dim = _require_square(x)
    if n * m != dim:
        raise DimensionMismatch(f"dims {dims} do not factor a {dim}x{dim} matrix")
    x4 = x.reshape(n, m, n, m)
    if which == "second":
        return np.einsum("imjm->ij", x4)
    if which == "first":
        return np.einsum("imin->mn", x4)
    raise ValueError(f"which must be 'first' or 'second', got {which!r}")


def _jacobi(a: np.ndarray):
    """Cyclic Jacobi diagonalisation of a Hermitian matrix (in place on a copy).

    Each rotation is the product of a phase change ``diag(1, e^{-i phi})``,
    which makes ``a[p, q]`` real, and a real Givens rotation that annihilates it.
    """
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max_abs(a)
    if scale == 0.0 or n == 1:
        return np.real(np.diag(a)).copy(), v
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = max_abs(a - np.diag(np.diag(a)))
        if off <= 1e-17 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mod = abs(apq)
                if mod <= 1e-300 or mod <= 1e-18 * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / mod
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mod)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ph = np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * ph * col_q
                a[:, q] = s * col_p + c * ph * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * ph * vq
                v[:, q] = s * vp + c * ph * vq
    return np.real(np.diag(a)).copy(), v


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    for comp in vec:
        if abs(comp) > 1e-12:
            return vec * (abs(comp) / comp)
    return vec


def herm_eig(h: np.ndarray, tol: float = HERMITIAN_TOL) -> HermEig:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues are returned in descending order.  Every eigenvector has its
    first nonzero component made real positive, and exact eigenvalue ties are
    ordered lexicographically by the phase-fixed eigenvectors, so the output is
    reproducible for identical input.
    """
    h = np.asarray(h, dtype=complex)
    _require_square(h)
    defect = hermiticity_defect(h)
    if defect > tol:
        raise NotHermitian(f"matrix is not Hermitian (||h - h*|| = {defect:.3g})")
    h = 0.5 * (h + dagger(h))
    values, vectors = _jacobi(h)
    cols = [_fix_phase(vectors[:, j]) for j in range(len(values))]

    def key(j):
        return (-values[j], tuple((round(c.real, 12), round(c.imag, 12)) for c in cols[j]))

    order = sorted(range(len(values)), key=key)
    vecs = np.column_stack([cols[j] for j in order]) if order else vectors
    return HermEig(values[order], vecs)


def is_psd(h: np.ndarray, tol: float = PSD_TOL) -> bool:
    return bool(herm_eig(h, tol=max(tol, HERMITIAN_TOL)).eigenvalues[-1] >= -tol)


def mat_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series."""
    a = np.asarray(a, dtype=complex)
    n = _require_square(a)
    norm = float(np.max(np.sum(np.abs(a), axis=1))) if n else 0.0
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
    a = a / (2.0**squarings)
    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 40):
        term = term @ a / k
        result = result + term
        if max_abs(term) <= 1e-18 * max_abs(result):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def approx_eq(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
    """True iff ``max |x_ij - y_ij| <= tol``."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    return max_abs(x - y) <= tol
