"""Open system S + E: exact reduced dynamics and the short-time GKS expansion.

The total Hamiltonian is ``K = H_S (x) 1 + 1 (x) H_E + H_SE`` (time
independent) acting on ``C^N (x) C^M``, and the environment starts in the pure
state ``|e><e|`` with ``e = env_state_index``.  The reduced map is
``V(t) rho = Tr_E(U (rho (x) rho_E) U^*)`` with ``U = exp(-i t K)``.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from cpkit.bases import OperatorBasis
from cpkit.channels import SuperOp, gks, superop_from_map
from cpkit.errors import (
    BasisNotUnitFirst,
    DimensionMismatch,
    InvalidState,
    NotHermitian,
    SingularPropagator,
)
from cpkit.lindblad import GeneratorMatrix
from cpkit.linalg import dagger, herm_eig, hermiticity_defect, mat_exp, max_abs, partial_trace

MODEL_HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class OpenSystemModel:
    n: int
    m: int
    h_s: np.ndarray
    h_e: np.ndarray
    h_se: np.ndarray
    env_state_index: int = 0

    def __post_init__(self):
        shapes = {"h_s": (self.n, self.n), "h_e": (self.m, self.m), "h_se": (self.n * self.m,) * 2}
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != shape:
                raise DimensionMismatch(f"{name} must have shape {shape}, got {arr.shape}")
            defect = hermiticity_defect(arr)
            if defect > MODEL_HERMITIAN_TOL:
                raise NotHermitian(f"{name} is not Hermitian (defect {defect:.3g})")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not 0 <= self.env_state_index < self.m:
            raise DimensionMismatch(f"env_state_index {self.env_state_index} out of range for M={self.m}")

    @property
    def total_hamiltonian(self) -> np.ndarray:
        return (
            np.kron(self.h_s, np.eye(self.m))
            + np.kron(np.eye(self.n), self.h_e)
            + self.h_se
        )

    def env_state(self) -> np.ndarray:
        rho_e = np.zeros((self.m, self.m), dtype=complex)
        rho_e[self.env_state_index, self.env_state_index] = 1.0
        return rho_e

    def env_order(self) -> List[int]:
        """Environment levels with the initial state first, then the rest ascending."""
        e = self.env_state_index
        return [e] + [j for j in range(self.m) if j != e]


@dataclass(frozen=True)
class Coefficients:
    """Expansion of ``H_S`` and ``H_SE`` in ``F_a`` and ``F_a (x) |g><e|``.

    ``h[a-1]`` and ``v0[a-1]`` belong to basis index ``a >= 1``;
    ``vplus[a-1, g-1]`` to environment index ``g = 1..M-1``.
    """

    h: np.ndarray
    v0: np.ndarray
    vplus: np.ndarray


def _require_expansion_basis(f: OperatorBasis):
    if not f.unit_first:
        raise BasisNotUnitFirst("basis must start with F_0 = I / sqrt(N)")
    if not f.is_hermitian:
        raise NotHermitian("the expansion needs a basis of Hermitian operators")


def extract_coefficients(model: OpenSystemModel, f: OperatorBasis) -> Coefficients:
    _require_expansion_basis(f)
    if f.dim != model.n:
        raise DimensionMismatch(f"basis dim {f.dim} does not match system dim {model.n}")
    rest = f.elements[1:]
    h = np.array([np.vdot(x, model.h_s) for x in rest])
    e = model.env_state_index
    v = np.zeros((len(rest), model.m), dtype=complex)
    for c, level in enumerate(model.env_order()):
        e_op = np.zeros((model.m, model.m), dtype=complex)
        e_op[level, e] = 1.0
        for a, x in enumerate(rest):
            v[a, c] = np.vdot(np.kron(x, e_op), model.h_se)
    if max_abs(h.imag) > MODEL_HERMITIAN_TOL or max_abs(v[:, 0].imag) > MODEL_HERMITIAN_TOL:
        raise NotHermitian("expansion coefficients h and v0 must be real")
    return Coefficients(h.real.copy(), v[:, 0].real.copy(), v[:, 1:].copy())


def _validate_state(rho: np.ndarray, n: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n, n):
        raise DimensionMismatch(f"state must be {n}x{n}, got {rho.shape}")
    if hermiticity_defect(rho) > 1e-9:
        raise InvalidState("state is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-9:
        raise InvalidState(f"state has trace {np.trace(rho).real:.12g}, expected 1")
    lowest = herm_eig(rho).eigenvalues[-1]
    if lowest < -1e-9:
        raise InvalidState(f"state has negative eigenvalue {lowest:.3g}")
    return rho


def _propagate(model: OpenSystemModel, x: np.ndarray, u: np.ndarray, rho_e: np.ndarray) -> np.ndarray:
    return partial_trace(u @ np.kron(x, rho_e) @ dagger(u), (model.n, model.m))


def propagator(model: OpenSystemModel, t: float) -> np.ndarray:
    return mat_exp(-1j * t * model.total_hamiltonian)


def evolve_reduced(model: OpenSystemModel, rho0: np.ndarray, t: float) -> np.ndarray:
    rho0 = _validate_state(rho0, model.n)
    if t == 0:
        return rho0.copy()
    return _propagate(model, rho0, propagator(model, t), model.env_state())


def reduced_superop(model: OpenSystemModel, t: float, env_state: Optional[np.ndarray] = None) -> SuperOp:
    """Superoperator ``V(t)``; the partial-trace map is linear, so matrix units map directly.

    ``env_state`` overrides the pure initial environment state by an arbitrary
    ``M x M`` density matrix.
    """
    rho_e = model.env_state() if env_state is None else np.asarray(env_state, dtype=complex)
    if rho_e.shape != (model.m, model.m):
        raise DimensionMismatch(f"environment state must be {model.m}x{model.m}")
    u = propagator(model, t)
    return superop_from_map(lambda x: _propagate(model, x, u, rho_e), model.n)


def _derivative_superops(model: OpenSystemModel):
    """Superoperators of ``rho -> d/dt V(t) rho`` and ``d^2/dt^2`` at ``t = 0``."""
    k = model.total_hamiltonian
    rho_e = model.env_state()
    dims = (model.n, model.m)

    def first(x):
        y = np.kron(x, rho_e)
        return -1j * partial_trace(k @ y - y @ k, dims)

    def second(x):
        y = np.kron(x, rho_e)
        c = k @ y - y @ k
        return -partial_trace(k @ c - c @ k, dims)

    return superop_from_map(first, model.n), superop_from_map(second, model.n)


@dataclass(frozen=True)
class Expansion:
    """``g(t) = g0 + g1 t + g2 t^2 + O(t^3)``.

    ``g2_analytic`` marks the entries of ``g2`` given by the closed-form
    coefficient formula (indices ``a, b >= 1``); row and column 0 are
    evaluated numerically from the double commutator ``-Tr_E[K, [K, .]] / 2``.
    """

    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g2_analytic: np.ndarray
    basis: OperatorBasis = field(repr=False)

    def at(self, t: float) -> np.ndarray:
        return self.g0 + self.g1 * t + self.g2 * t * t


def expansion(model: OpenSystemModel, f: OperatorBasis) -> Expansion:
    coeffs = extract_coefficients(model, f)
    n = model.n
    n2 = n * n
    c = coeffs.h + coeffs.v0

    g0 = np.zeros((n2, n2), dtype=complex)
    g0[0, 0] = n
    g1 = np.zeros((n2, n2), dtype=complex)
    g1[0, 1:] = 1j * np.sqrt(n) * c
    g1[1:, 0] = -1j * np.sqrt(n) * c

    g2 = np.zeros((n2, n2), dtype=complex)
    g2[1:, 1:] = np.outer(c, c) + coeffs.vplus @ dagger(coeffs.vplus)
    _, second = _derivative_superops(model)
    numeric = 0.5 * gks(second, f).g
    g2[0, :] = numeric[0, :]
    g2[:, 0] = numeric[:, 0]

    analytic = np.zeros((n2, n2), dtype=bool)
    analytic[1:, 1:] = True
    return Expansion(g0, g1, g2, analytic, f)


@dataclass
class SampleReport:
    t: float
    deviation_submatrix: float
    deviation_full: float
    first_order_deviation: float
    min_eig_exact: float
    min_eig_truncated: float


@dataclass
class ExpansionReport:
    samples: List[SampleReport]
    exponent: Optional[float]
    cubic_constant: float
    g2_sub_min_eigenvalue: float
    eps1_dominant: float
    eps1_max_abs: float
    eps2_min: float
    tolerances: dict

    @property
    def exponent_ok(self) -> bool:
        return self.exponent is None or self.exponent >= self.tolerances["exponent"]

    @property
    def g2_psd(self) -> bool:
        return self.g2_sub_min_eigenvalue >= -self.tolerances["g2_psd"]

    @property
    def perturbation_ok(self) -> bool:
        tol1 = self.tolerances["eps1"]
        return (
            abs(self.eps1_dominant) <= tol1
            and self.eps1_max_abs <= tol1
            and self.eps2_min >= -self.tolerances["eps2"]
        )

    @property
    def exact_psd(self) -> bool:
        return all(s.min_eig_exact >= -self.tolerances["exact_psd"] for s in self.samples)

    @property
    def truncated_psd(self) -> bool:
        return all(s.min_eig_truncated >= -self.tolerances["truncated_psd"] for s in self.samples)

    @property
    def passed(self) -> bool:
        return self.exponent_ok and self.g2_psd and self.perturbation_ok and self.exact_psd


RESIDUAL_FLOOR = 1e-13


def loglog_slope(ts: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Least-squares slope of ``log y`` against ``log t``; ``None`` if ``y`` is at roundoff."""
    if min(ys) <= RESIDUAL_FLOOR:
        return None
    slope, _ = np.polyfit(np.log(ts), np.log(ys), 1)
    return float(slope)


def gks_at(model: OpenSystemModel, f: OperatorBasis, t: float) -> np.ndarray:
    return gks(reduced_superop(model, t), f).g


def verify_expansion(
    model: OpenSystemModel,
    f: OperatorBasis,
    t_samples: Sequence[float],
    exp: Optional[Expansion] = None,
) -> ExpansionReport:
    """Compare the expansion with the simulated GKS matrix at small times.

    The reported exponent is the log-log slope of the ``a, b >= 1`` deviation
    over ``t_samples``.  Row and column 0 are checked at first order only.
    """
    if exp is None:
        exp = expansion(model, f)
    samples = []
    for t in t_samples:
        g = gks_at(model, f, t)
        poly = exp.at(t)
        diff = g - poly
        lin = g - (exp.g0 + exp.g1 * t)
        first_order = max(max_abs(lin[0, :]), max_abs(lin[:, 0]))
        samples.append(
            SampleReport(
                t=float(t),
                deviation_submatrix=max_abs(diff[1:, 1:]),
                deviation_full=max_abs(diff),
                first_order_deviation=first_order,
                min_eig_exact=float(herm_eig(g).eigenvalues[-1]),
                min_eig_truncated=float(herm_eig(poly).eigenvalues[-1]),
            )
        )
    ts = [s.t for s in samples]
    devs = [s.deviation_submatrix for s in samples]
    exponent = loglog_slope(ts, devs) if len(ts) > 1 else None
    cubic = float(np.mean([d / t**3 for d, t in zip(devs, ts)])) if ts else 0.0

    n2 = len(f)
    sub_min = float(herm_eig(exp.g2[1:, 1:]).eigenvalues[-1]) if n2 > 1 else 0.0
    eig0 = herm_eig(exp.g0)
    eps1, eps2 = [], []
    dominant = eig0.vectors[:, 0]
    eps1_dom = float(np.vdot(dominant, exp.g1 @ dominant).real)
    for lam, phi in zip(eig0.eigenvalues, eig0.vectors.T):
        if abs(lam) > 1e-12:
            continue
        eps1.append(abs(np.vdot(phi, exp.g1 @ phi)))
        eps2.append(float(np.vdot(phi, exp.g2 @ phi).real))
    return ExpansionReport(
        samples=samples,
        exponent=exponent,
        cubic_constant=cubic,
        g2_sub_min_eigenvalue=sub_min,
        eps1_dominant=eps1_dom,
        eps1_max_abs=float(max(eps1, default=0.0)),
        eps2_min=float(min(eps2, default=0.0)),
        tolerances={
            "exponent": 2.9,
            "g2_psd": 1e-10,
            "eps1": 1e-10,
            "eps2": 1e-9,
            "exact_psd": 1e-8,
            "truncated_psd": 1e-7,
        },
    )


def extract_generator(model: OpenSystemModel, f: OperatorBasis, t: float, dt: float = 1e-4) -> GeneratorMatrix:
    """Generator ``K(t) = V'(t) V(t)^{-1}`` by a central difference of the reduced map."""
    v = reduced_superop(model, t).matrix
    smallest = float(np.linalg.svd(v, compute_uv=False)[-1])
    if smallest < 1e-12:
        raise SingularPropagator(f"V({t}) is singular (smallest singular value {smallest:.3g})")
    dv = (reduced_superop(model, t + dt).matrix - reduced_superop(model, t - dt).matrix) / (2 * dt)
    k_super = SuperOp(dv @ np.linalg.inv(v))
    k = gks(k_super, f).g
    return GeneratorMatrix(0.5 * (k + dagger(k)), f)


def random_model(n: int, m: int, rng: np.random.Generator, scale: float = 1.0) -> OpenSystemModel:
    """Model with Gaussian Hermitian Hamiltonian parts (test and demo helper)."""

    def herm(d):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        return scale * (a + dagger(a)) / 2

    return OpenSystemModel(n, m, herm(n), herm(m), herm(n * m))

