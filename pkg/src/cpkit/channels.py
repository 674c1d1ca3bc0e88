"""Superoperators and their matrix isomorphisms.

A superoperator on the ``N x N`` matrices is stored as an ``N**2 x N**2``
matrix acting on row-major vectorisations, ``vec(A)[k*N + l] = A[k, l]``.
Its entry at row ``k*N + l``, column ``i*N + j`` is the coefficient of
``|k><l|`` in the image of ``|i><j|``.
"""

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from cpkit.bases import OperatorBasis, basis_change_unitary, standard_basis
from cpkit.errors import DimensionMismatch, NotCompletelyPositive, NotHermitian, WrongBasis
from cpkit.linalg import (
    HERMITIAN_TOL,
    dagger,
    herm_eig,
    hermiticity_defect,
    max_abs,
    partial_trace,
)

KRAUS_DROP_NORM = 1e-12


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(n, n)


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SuperOp:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        n = int(round(np.sqrt(m.shape[0]))) if m.ndim == 2 else 0
        if m.ndim != 2 or m.shape[0] != m.shape[1] or n * n != m.shape[0]:
            raise DimensionMismatch(f"superoperator must be N^2 x N^2, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def __call__(self, a: np.ndarray) -> np.ndarray:
        return apply(self, a)

    def __matmul__(self, other: "SuperOp") -> "SuperOp":
        return compose(self, other)


@dataclass(frozen=True)
class GksMatrix:
    """Coefficients ``g[a, b]`` of ``E(A) = sum g[a, b] F_a A F_b^*``."""

    g: np.ndarray
    basis: OperatorBasis

    def __post_init__(self):
        g = _frozen(self.g)
        n2 = len(self.basis)
        if g.shape != (n2, n2):
            raise DimensionMismatch(f"GKS matrix must be {n2}x{n2}, got {g.shape}")
        object.__setattr__(self, "g", g)

    @property
    def dim(self) -> int:
        return self.basis.dim


@dataclass(frozen=True)
class KrausSet:
    operators: tuple

    def __post_init__(self):
        ops = [np.array(a, dtype=complex) for a in self.operators]
        if not ops:
            raise DimensionMismatch("a Kraus set needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise DimensionMismatch(f"Kraus operators must be square, got {shape}")
        for a in ops:
            if a.shape != shape:
                raise DimensionMismatch(f"Kraus operators have mixed shapes {shape} and {a.shape}")
        kept = [a for a in ops if np.linalg.norm(a) >= KRAUS_DROP_NORM]
        if not kept:
            kept = [np.zeros(shape, dtype=complex)]
        for a in kept:
            a.flags.writeable = False
        object.__setattr__(self, "operators", tuple(kept))

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)


def superop_from_map(action: Callable[[np.ndarray], np.ndarray], n: int) -> SuperOp:
    """Tabulate a linear map by its action on the matrix units ``|i><j|``."""
    cols = []
    for i in range(n):
        for j in range(n):
            unit = np.zeros((n, n), dtype=complex)
            unit[i, j] = 1.0
            cols.append(vec(action(unit)))
    return SuperOp(np.column_stack(cols))


def apply(s: SuperOp, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"operator shape {a.shape} does not match superoperator dim {s.dim}")
    return unvec(s.matrix @ vec(a))


def compose(outer: SuperOp, inner: SuperOp) -> SuperOp:
    """The superoperator ``A -> outer(inner(A))``."""
    if outer.dim != inner.dim:
        raise DimensionMismatch("superoperators act on different spaces")
    return SuperOp(outer.matrix @ inner.matrix)


def identity_superop(n: int) -> SuperOp:
    return SuperOp(np.eye(n * n))


def transposition_superop(n: int) -> SuperOp:
    return superop_from_map(lambda a: a.T, n)


def _swap_kj(m: np.ndarray, n: int) -> np.ndarray:
    # [a, b, c, d] -> [c, a, d, b] exchanges the middle indices of the two pairs
    return m.reshape(n, n, n, n).transpose(2, 0, 3, 1).reshape(n * n, n * n)


def choi(s: SuperOp) -> GksMatrix:
    """Choi matrix ``c[i*N + k, j*N + l]`` equal to superoperator entry ``[k*N + l, i*N + j]``."""
    n = s.dim
    return GksMatrix(_swap_kj(s.matrix, n), standard_basis(n))


def choi_inverse(c: GksMatrix) -> SuperOp:
    if c.basis.label != "standard":
        raise WrongBasis(f"Choi matrices live in the standard basis, got {c.basis.label!r}")
    n = c.dim
    m = np.asarray(c.g).reshape(n, n, n, n).transpose(1, 3, 0, 2).reshape(n * n, n * n)
    return SuperOp(m)


def choi_inverse_partial_trace(x: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Evaluate ``Tr_1(x (a^T (x) 1))`` for a Choi operator ``x``."""
    a = np.asarray(a)
    n = a.shape[0]
    return partial_trace(np.asarray(x) @ np.kron(a.T, np.eye(n)), (n, n), which="first")


def gks(s: SuperOp, f: OperatorBasis) -> GksMatrix:
    """Project a superoperator onto the orthonormal family ``A -> F_a A F_b^*``.

    ``g[a, b] = sum_e <F_a E_e F_b^*, S(E_e)>`` with ``E_e`` the standard basis;
    the sum is carried out as a single contraction over the superoperator entries.
    """
    if f.dim != s.dim:
        raise DimensionMismatch(f"basis dim {f.dim} does not match superoperator dim {s.dim}")
    n = s.dim
    s4 = s.matrix.reshape(n, n, n, n)
    g = np.einsum("aki,blj,klij->ab", np.conj(f.elements), f.elements, s4)
    return GksMatrix(g, f)


def gks_inverse(g: GksMatrix) -> SuperOp:
    f = g.basis.elements
    n = g.dim
    s4 = np.einsum("ab,aki,blj->klij", g.g, f, np.conj(f))
    return SuperOp(s4.reshape(n * n, n * n))


def gks_change_basis(g: GksMatrix, target: OperatorBasis) -> GksMatrix:
    u = basis_change_unitary(g.basis, target)
    v = u.T
    return GksMatrix(v @ g.g @ dagger(v), target)


def _check_dims(s: SuperOp, f: OperatorBasis):
    if f.dim != s.dim:
        raise DimensionMismatch(f"basis dim {f.dim} does not match superoperator dim {s.dim}")


def dpj(s: SuperOp, f: OperatorBasis) -> np.ndarray:
    """de Pillis-Jamiolkowski matrix ``sum_a F_a^* (x) S(F_a)``."""
    _check_dims(s, f)
    return sum(np.kron(dagger(x), apply(s, x)) for x in f)


def pskh(s: SuperOp, f: OperatorBasis) -> np.ndarray:
    """``sum_a F_a (x) S(F_a)``: the Choi sum with the matrix units replaced by ``F_a``.

    The first tensor factor enters unconjugated.  In the standard basis this
    is the Choi matrix; for Hermitian bases it coincides with :func:`dpj`.
    """
    _check_dims(s, f)
    return sum(np.kron(x, apply(s, x)) for x in f)


def fc(s: SuperOp, f: OperatorBasis) -> np.ndarray:
    """Frembs-Cavalcanti matrix ``sum_a conj(F_a) (x) S(F_a)`` (entrywise conjugate)."""
    _check_dims(s, f)
    return sum(np.kron(np.conj(x), apply(s, x)) for x in f)


@dataclass(frozen=True)
class Verdict:
    hermiticity_preserving: bool
    trace_preserving: bool
    completely_positive: bool
    min_eigenvalue: float
    max_eigenvalue: float


def trace_defect(g: GksMatrix) -> float:
    """``|| sum conj(g[a, b]) F_a^* F_b - I ||``, zero iff the map is trace preserving."""
    f = g.basis.elements
    x = np.einsum("ab,aji,bjk->ik", np.conj(g.g), np.conj(f), f)
    return max_abs(x - np.eye(g.dim))


def check_gks(g: GksMatrix, tol: float = HERMITIAN_TOL) -> Verdict:
    herm = hermiticity_defect(g.g) <= tol
    eig = herm_eig(0.5 * (g.g + dagger(g.g))).eigenvalues
    tp = trace_defect(g) <= tol
    cp = herm and eig[-1] >= -tol
    return Verdict(herm, tp, bool(cp), float(eig[-1]), float(eig[0]))


def check(s: SuperOp, f: OperatorBasis = None, tol: float = HERMITIAN_TOL) -> Verdict:
    """Hermiticity preservation, trace preservation and complete positivity of ``s``.

    All three are read off the GKS matrix in basis ``f`` (the standard basis
    if omitted); the verdicts do not depend on the basis.
    """
    if f is None:
        f = standard_basis(s.dim)
    return check_gks(gks(s, f), tol)


def _fix_kraus_phase(a: np.ndarray) -> np.ndarray:
    flat = a.reshape(-1)
    big = flat[int(np.argmax(np.abs(flat)))]
    if abs(big) == 0:
        return a
    return a * (abs(big) / big)


def kraus_from_gks(g: GksMatrix, tol: float = HERMITIAN_TOL) -> KrausSet:
    """Kraus operators ``sqrt(lam_c) sum_a W[a, c] F_a`` from the spectrum of ``g``.

    Eigenvalues with ``|lam| <= tol`` are discarded; a remaining negative
    eigenvalue raises :class:`NotCompletelyPositive`.
    """
    defect = hermiticity_defect(g.g)
    if defect > tol:
        raise NotHermitian(f"GKS matrix is not Hermitian (defect {defect:.3g})")
    eig = herm_eig(g.g, tol=max(tol, HERMITIAN_TOL))
    ops: List[np.ndarray] = []
    for lam, w in zip(eig.eigenvalues, eig.vectors.T):
        if abs(lam) <= tol:
            continue
        if lam < 0:
            raise NotCompletelyPositive(f"GKS matrix has negative eigenvalue {lam:.6g}")
        ops.append(_fix_kraus_phase(np.sqrt(lam) * g.basis.combine(w)))
    if not ops:
        ops = [np.zeros((g.dim, g.dim), dtype=complex)]
    return KrausSet(tuple(ops))


def superop_from_kraus(k) -> SuperOp:
    """Superoperator of ``X -> sum_i A_i X A_i^*``.

    Under row-major vectorisation ``vec(A X B) = (A (x) B^T) vec(X)``, so each
    Kraus operator contributes ``A (x) conj(A)``.
    """
    if not isinstance(k, KrausSet):
        k = KrausSet(tuple(k))
    return SuperOp(sum(np.kron(a, np.conj(a)) for a in k))


def adjoint(s: SuperOp) -> SuperOp:
    """Hilbert-Schmidt adjoint; vectorisation is an isometry, so this is ``S^*``."""
    return SuperOp(dagger(s.matrix))


def kraus_superop_adjoint(k: Sequence[np.ndarray]) -> SuperOp:
    return superop_from_kraus([dagger(np.asarray(a)) for a in k])
