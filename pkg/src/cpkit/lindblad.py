"""GKS generator matrices, the Lindblad form, and the ODE for the GKS matrix.

A generator ``K`` acts as ``K(rho) = sum k[a, b] F_a rho F_b^*`` with a
Hermitian, trace-annihilating coefficient matrix ``k``.  Conversion to and from
the Lindblad form requires a basis with ``F_0 = I / sqrt(N)``.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from cpkit.bases import OperatorBasis, StructureConstants, gellmann_basis, structure_constants
from cpkit.channels import GksMatrix, SuperOp, gks, gks_inverse, identity_superop
from cpkit.errors import BasisNotUnitFirst, DimensionMismatch, InvariantViolation
from cpkit.linalg import dagger, herm_eig, hermiticity_defect, max_abs

GENERATOR_TOL = 1e-9


def _annihilation_defect(k: np.ndarray, f: OperatorBasis) -> float:
    x = np.einsum("ab,bji,ajk->ik", k, np.conj(f.elements), f.elements)
    return max_abs(x)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Hermitian, trace-annihilating GKS matrix of a generator."""

    k: np.ndarray
    basis: OperatorBasis

    def __post_init__(self):
        k = np.array(self.k, dtype=complex)
        n2 = len(self.basis)
        if k.shape != (n2, n2):
            raise DimensionMismatch(f"generator matrix must be {n2}x{n2}, got {k.shape}")
        defect = hermiticity_defect(k)
        if defect > GENERATOR_TOL:
            raise InvariantViolation(f"generator matrix is not Hermitian (defect {defect:.3g})")
        tr = abs(np.trace(k))
        op = _annihilation_defect(k, self.basis)
        if tr > GENERATOR_TOL or op > GENERATOR_TOL:
            raise InvariantViolation(
                f"generator is not trace-annihilating (|Tr k| = {tr:.3g}, "
                f"||sum k F_b^* F_a|| = {op:.3g})"
            )
        k.flags.writeable = False
        object.__setattr__(self, "k", k)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def trace_residual(self) -> float:
        return float(abs(np.trace(self.k)))

    def superop(self) -> SuperOp:
        return gks_inverse(GksMatrix(self.k, self.basis))


@dataclass(frozen=True)
class LindbladForm:
    """``-i[H, rho] + sum_a rate_a (A_a rho A_a^* - {A_a^* A_a, rho} / 2)``.

    ``lindblad_ops`` must be ``N**2 - 1`` traceless, orthonormal operators.
    """

    hamiltonian: np.ndarray
    rates: np.ndarray
    lindblad_ops: np.ndarray

    def __post_init__(self):
        h = np.array(self.hamiltonian, dtype=complex)
        rates = np.array(self.rates, dtype=float)
        ops = np.array(self.lindblad_ops, dtype=complex)
        n = h.shape[0]
        if h.shape != (n, n):
            raise DimensionMismatch(f"Hamiltonian must be square, got {h.shape}")
        if hermiticity_defect(h) > GENERATOR_TOL:
            raise InvariantViolation("Hamiltonian is not Hermitian")
        if ops.shape != (n * n - 1, n, n) or rates.shape != (n * n - 1,):
            raise InvariantViolation(
                f"need {n * n - 1} rates and Lindblad operators of size {n}x{n}, "
                f"got {rates.shape} and {ops.shape}"
            )
        traces = np.einsum("aii->a", ops)
        if max_abs(traces) > GENERATOR_TOL:
            raise InvariantViolation("Lindblad operators must be traceless")
        flat = ops.reshape(len(ops), -1)
        if max_abs(np.conj(flat) @ flat.T - np.eye(len(ops))) > GENERATOR_TOL:
            raise InvariantViolation("Lindblad operators must be orthonormal")
        for arr in (h, rates, ops):
            arr.flags.writeable = False
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "lindblad_ops", ops)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @classmethod
    def with_completion(cls, hamiltonian, rates: Sequence[float], ops: Sequence[np.ndarray]):
        """Build a Lindblad form from a few channels, padding with zero-rate operators.

        The given operators are normalised in Hilbert-Schmidt norm (their rate
        is rescaled to keep the dissipator unchanged) and must be traceless and
        mutually orthogonal.  The remaining operators are Gram-Schmidt
        completions against the Gell-Mann basis.
        """
        h = np.asarray(hamiltonian, dtype=complex)
        n = h.shape[0]
        full_ops, full_rates = [], []
        for rate, a in zip(rates, ops):
            a = np.asarray(a, dtype=complex)
            norm2 = float(np.vdot(a, a).real)
            full_ops.append(a / np.sqrt(norm2))
            full_rates.append(rate * norm2)
        for cand in gellmann_basis(n).elements[1:]:
            if len(full_ops) == n * n - 1:
                break
            x = cand.copy()
            for a in full_ops:
                x = x - np.vdot(a, x) * a
            norm = np.sqrt(np.vdot(x, x).real)
            if norm > 1e-8:
                full_ops.append(x / norm)
                full_rates.append(0.0)
        return cls(h, np.array(full_rates), np.array(full_ops))


def _require_unit_first(f: OperatorBasis):
    if not f.unit_first:
        raise BasisNotUnitFirst("basis must start with F_0 = I / sqrt(N)")


def generator_apply(k: GeneratorMatrix, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (k.dim, k.dim):
        raise DimensionMismatch(f"operator shape {rho.shape} does not match generator dim {k.dim}")
    f = k.basis.elements
    return np.einsum("ab,aij,jk,blk->il", k.k, f, rho, np.conj(f))


def lindblad_apply(l: LindbladForm, rho: np.ndarray) -> np.ndarray:
    """Right-hand side of the Lindblad equation, evaluated term by term."""
    rho = np.asarray(rho, dtype=complex)
    h = l.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for rate, a in zip(l.rates, l.lindblad_ops):
        ad = dagger(a)
        out = out + rate * (a @ rho @ ad - 0.5 * (ad @ a @ rho + rho @ ad @ a))
    return out


def generator_to_lindblad(k: GeneratorMatrix) -> LindbladForm:
    f = k.basis
    _require_unit_first(f)
    n = f.dim
    km = np.asarray(k.k)
    rest = f.elements[1:]
    big_f = np.tensordot(km[1:, 0], rest, axes=1) / np.sqrt(n)
    hamiltonian = 0.5j * (big_f - dagger(big_f))
    g_tilde = 0.5 * (big_f + dagger(big_f))
    g_op = g_tilde + km[0, 0].real / (2 * n) * np.eye(n)
    g_expected = -0.5 * np.einsum("ab,bji,ajk->ik", km[1:, 1:], np.conj(rest), rest)
    if max_abs(g_op - g_expected) > GENERATOR_TOL:
        raise InvariantViolation("anticommutator part inconsistent with trace annihilation")
    eig = herm_eig(km[1:, 1:])
    ops = np.tensordot(eig.vectors.T, rest, axes=1)
    return LindbladForm(hamiltonian, eig.eigenvalues, ops)


def lindblad_to_generator(l: LindbladForm, f: OperatorBasis) -> GeneratorMatrix:
    _require_unit_first(f)
    if f.dim != l.dim:
        raise DimensionMismatch(f"basis dim {f.dim} does not match Lindblad form dim {l.dim}")
    n = f.dim
    rest = f.elements[1:]
    # W[b, a] = <F_b | A_a>; the A_a are traceless, so they have no F_0 component
    w = np.conj(rest.reshape(len(rest), -1)) @ l.lindblad_ops.reshape(len(rest), -1).T
    lower = w @ np.diag(l.rates) @ dagger(w)
    k = np.zeros((n * n, n * n), dtype=complex)
    k[1:, 1:] = lower
    k[0, 0] = -np.trace(lower).real
    g_op = -0.5 * np.einsum("ab,bji,ajk->ik", lower, np.conj(rest), rest)
    g_tilde = g_op - k[0, 0].real / (2 * n) * np.eye(n)
    big_f = g_tilde - 1j * l.hamiltonian
    coeffs = np.sqrt(n) * (np.conj(rest.reshape(len(rest), -1)) @ big_f.reshape(-1))
    k[1:, 0] = coeffs
    k[0, 1:] = np.conj(coeffs)
    return GeneratorMatrix(k, f)


def gks_ode_tensor(k: GeneratorMatrix, pi: StructureConstants) -> np.ndarray:
    """``A[lam, mu, a, b] = sum_{c,d} k[c, d] Pi^lam_{c a} conj(Pi^mu_{d b})``."""
    if pi.pi.shape[0] != k.k.shape[0]:
        raise DimensionMismatch("structure constants and generator use different dimensions")
    return np.einsum("cd,lca,mdb->lmab", k.k, pi.pi, np.conj(pi.pi))


@dataclass(frozen=True)
class GksTrajectory:
    times: np.ndarray
    g: np.ndarray
    basis: OperatorBasis

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i) -> GksMatrix:
        return GksMatrix(self.g[i], self.basis)

    @property
    def final(self) -> GksMatrix:
        return self[-1]


def integrate_gks(
    k_of_t: Callable[[float], GeneratorMatrix],
    f: OperatorBasis,
    t_end: float,
    steps: int,
) -> GksTrajectory:
    """Fixed-step classical Runge-Kutta integration of ``dg/dt = A(t) g``.

    Starts from the GKS matrix of the identity map and returns all
    ``steps + 1`` samples.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    pi = structure_constants(f)
    h = t_end / steps

    def rhs(t, g):
        k = k_of_t(t)
        if k.basis is not f and max_abs(k.basis.elements - f.elements) > 0:
            raise DimensionMismatch("generator basis differs from integration basis")
        return np.einsum("lmab,ab->lm", gks_ode_tensor(k, pi), g)

    g = np.array(gks(identity_superop(f.dim), f).g)
    times = [0.0]
    out = [g.copy()]
    for i in range(steps):
        t = i * h
        k1 = rhs(t, g)
        k2 = rhs(t + h / 2, g + h / 2 * k1)
        k3 = rhs(t + h / 2, g + h / 2 * k2)
        k4 = rhs(t + h, g + h * k3)
        g = g + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        times.append((i + 1) * h)
        out.append(g.copy())
    return GksTrajectory(np.array(times), np.array(out), f)
