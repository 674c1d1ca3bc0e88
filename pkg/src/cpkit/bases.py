"""Orthonormal operator bases of the N x N matrices and their algebra.

A basis is stored as an array of shape ``(N**2, N, N)``.  Index ``alpha`` of
the standard basis is the double index ``(i, j)`` flattened as ``i * N + j``
and the element is ``|j><i|`` (row ``j``, column ``i``).  With this choice the
GKS matrix in the standard basis coincides entrywise with the Choi matrix.
"""

from dataclasses import dataclass

import numpy as np

from cpkit.errors import DimensionMismatch, NonOrthonormalBasis
from cpkit.linalg import dagger, max_abs

ORTHONORMAL_TOL = 1e-10


def gram_matrix(elements: np.ndarray) -> np.ndarray:
    """All pairwise Hilbert-Schmidt inner products ``<F_a|F_b>``."""
    flat = elements.reshape(elements.shape[0], -1)
    return np.conj(flat) @ flat.T


@dataclass(frozen=True)
class OperatorBasis:
    """Ordered Hilbert-Schmidt orthonormal family of ``N**2`` operators.

    The constructor validates orthonormality and raises
    :class:`NonOrthonormalBasis` instead of silently orthonormalising.
    """

    elements: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        elems = np.array(self.elements, dtype=complex)
        if elems.ndim != 3 or elems.shape[1] != elems.shape[2]:
            raise DimensionMismatch(f"basis elements must be square matrices, got {elems.shape}")
        n = elems.shape[1]
        if elems.shape[0] != n * n:
            raise NonOrthonormalBasis(f"expected {n * n} elements for N={n}, got {elems.shape[0]}")
        defect = max_abs(gram_matrix(elems) - np.eye(n * n))
        if defect > ORTHONORMAL_TOL:
            raise NonOrthonormalBasis(f"basis is not orthonormal (Gram defect {defect:.3g})")
        elems.flags.writeable = False
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self):
        return self.elements.shape[0]

    def __getitem__(self, alpha):
        return self.elements[alpha]

    def __iter__(self):
        return iter(self.elements)

    @property
    def is_hermitian(self) -> bool:
        return all(max_abs(f - dagger(f)) <= ORTHONORMAL_TOL for f in self.elements)

    @property
    def unit_first(self) -> bool:
        """Whether ``F_0 = I / sqrt(N)``."""
        n = self.dim
        return max_abs(self.elements[0] - np.eye(n) / np.sqrt(n)) <= ORTHONORMAL_TOL

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        """Expansion coefficients ``<F_a|x>`` of an operator in this basis."""
        x = np.asarray(x)
        if x.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"operator shape {x.shape} does not match basis dim {self.dim}")
        return np.conj(self.elements.reshape(len(self), -1)) @ x.reshape(-1)

    def combine(self, coeffs) -> np.ndarray:
        """``sum_a coeffs[a] F_a``."""
        return np.tensordot(np.asarray(coeffs), self.elements, axes=1)


def standard_basis(n: int) -> OperatorBasis:
    if n < 1:
        raise ValueError("dimension must be positive")
    elems = np.zeros((n * n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            elems[i * n + j, j, i] = 1.0
    return OperatorBasis(elems, "standard")


def gellmann_basis(n: int) -> OperatorBasis:
    """Hermitian orthonormal basis with ``F_0 = I/sqrt(n)``.

    Order: identity, symmetric off-diagonal pairs ``(i, j)`` with ``i < j`` in
    lexicographic order, the matching antisymmetric pairs, then the traceless
    diagonal ladder ``diag(1, ..., 1, -k, 0, ...) / sqrt(k (k + 1))``.  For
    ``n = 2`` this is ``(I, X, Y, Z) / sqrt(2)``.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    elems = [np.eye(n, dtype=complex) / np.sqrt(n)]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[i, j] = m[j, i] = 1.0
        elems.append(m / np.sqrt(2))
    for i, j in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[i, j] = -1j
        m[j, i] = 1j
        elems.append(m / np.sqrt(2))
    for k in range(1, n):
        diag = np.zeros(n)
        diag[:k] = 1.0
        diag[k] = -k
        elems.append(np.diag(diag).astype(complex) / np.sqrt(k * (k + 1)))
    return OperatorBasis(np.array(elems), "gellmann")


def rotated_basis(f: OperatorBasis, u: np.ndarray, label: str = "custom") -> OperatorBasis:
    """The basis ``G_a = sum_b u[a, b] F_b`` for a unitary ``u``."""
    return OperatorBasis(np.tensordot(np.asarray(u), f.elements, axes=1), label)


def basis_change_unitary(f: OperatorBasis, g: OperatorBasis) -> np.ndarray:
    """Unitary ``U`` with ``F_a = sum_a' U[a, a'] G_a'``."""
    if f.dim != g.dim:
        raise DimensionMismatch(f"bases have different dimensions {f.dim} and {g.dim}")
    gf = np.conj(g.elements.reshape(len(g), -1)) @ f.elements.reshape(len(f), -1).T
    return gf.T


@dataclass(frozen=True)
class StructureConstants:
    """``pi[lam, gam, alpha]`` holds the coefficient of ``F_lam`` in ``F_gam F_alpha``."""

    pi: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.pi.shape[0])))


def structure_constants(f: OperatorBasis) -> StructureConstants:
    elems = f.elements
    products = np.einsum("gij,ajk->gaik", elems, elems)
    pi = np.einsum("lik,gaik->lga", np.conj(elems), products)
    return StructureConstants(pi)

