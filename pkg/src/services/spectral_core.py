"""Spectral Core Service

This module implements the semigroup action on truncated modal expansions, the weighted
Sobolev-tower norms, and the closed-form observation map tau -> B* S*_tau phi.

Adjoint coefficients evolve with e^{mu t}; primal coefficients with e^{conj(mu) t}.
Jordan chains act through the polynomial-exponential block
E_ij = e^{mu t} t^(j-i) / (j-i)!, j >= i, with positions listed head first.
"""

from dataclasses import dataclass
from math import factorial
from typing import Iterable, List, Optional, Sequence

import numpy as np

from errors import DegenerateOutput, InvalidTowerIndex
from logger import app_logger
from models.spectral_system import Branch, DUALITY, Side, SpectralSystem, TowerVector
from models.time_signal import TimeSignal
from quadrature import gauss_legendre_rule
from .numerics_config import numerics_config

# Highest derivative order attached to closed-form output signals
OUTPUT_DERIVATIVE_ORDERS = 6


def check_system(system: SpectralSystem) -> None:
    """Raise ValueError if the system violates its invariants."""
    ok, message = system.validate(int(numerics_config.get_default('JORDAN_MAX_CHAIN')))
    if not ok:
        raise ValueError(f"invalid spectral system '{system.name}': {message}")


def tower_weights(system: SpectralSystem, tower_index: int) -> np.ndarray:
    """Weights w_k(N) of the coefficient-weighted tower norms.

    w_k(N) = sum_{j<=N} |mu_k|^(2j) for N >= 0 and its reciprocal at |N| for N < 0.
    """
    moduli = np.abs(system.eigenvalues) ** 2
    powers = np.arange(abs(tower_index) + 1)
    graph = np.sum(moduli[:, None] ** powers[None, :], axis=1) if system.size else moduli
    return graph if tower_index >= 0 else 1.0 / graph


def tower_norm(system: SpectralSystem, vector: TowerVector) -> float:
    """Weighted norm of a coefficient vector at its own tower index."""
    coefficients = vector.to_array(system)
    weights = tower_weights(system, vector.tower_index)
    return float(np.sqrt(np.sum(np.abs(coefficients) ** 2 * weights)))


def dual_tower_norm(system: SpectralSystem, vector: TowerVector) -> float:
    """Norm in X_{N} computed from its definition as a dual of X_{-N}.

    The supremum of |<v, w>| / ||w||_{-N} is attained at the Riesz representer
    w = W_{-N}^{-1} v, which is evaluated explicitly.
    """
    coefficients = vector.to_array(system)
    if not np.any(coefficients):
        return 0.0
    weights = tower_weights(system, -vector.tower_index)
    partner = TowerVector.from_array(system, coefficients / weights, -vector.tower_index,
                                     vector.side)
    value = abs(DUALITY.state_pairing(coefficients, partner.to_array(system)))
    return float(value / tower_norm(system, partner))


def generator_matrix(system: SpectralSystem) -> np.ndarray:
    """Matrix of A* on adjoint coefficients."""
    matrix = np.diag(system.eigenvalues).astype(complex)
    for block in system.chains():
        for first, second in zip(block[:-1], block[1:]):
            matrix[first, second] = 1.0
    return matrix


def semigroup_matrix(system: SpectralSystem, t: float, side: Side = Side.ADJOINT) -> np.ndarray:
    """Matrix of the semigroup at time t acting on coefficients of the given side."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    eigenvalues = system.eigenvalues
    matrix = np.zeros((system.size, system.size), dtype=complex)
    for block in system.chains():
        exponent = np.exp(eigenvalues[block[0]] * t)
        for i, row in enumerate(block):
            for j in range(i, len(block)):
                matrix[row, block[j]] = exponent * t ** (j - i) / factorial(j - i)
    return matrix if side is Side.ADJOINT else matrix.conj().T


def semigroup_apply(system: SpectralSystem, t: float, vector: TowerVector) -> TowerVector:
    """Apply S_t (primal side) or S*_t (adjoint side) to a coefficient vector.

    Raises:
        ValueError: If t is negative or the vector has labels outside the system
    """
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    if not vector.belongs_to(system):
        raise ValueError("vector has coefficients on modes outside the system")
    coefficients = vector.to_array(system)
    if system.has_jordan_blocks:
        evolved = semigroup_matrix(system, t, vector.side) @ coefficients
    else:
        rates = system.eigenvalues if vector.side is Side.ADJOINT else system.eigenvalues.conj()
        evolved = np.exp(rates * t) * coefficients
    return TowerVector.from_array(system, evolved, vector.tower_index, vector.side)


def pairing(system: SpectralSystem, primal: TowerVector, adjoint: TowerVector) -> complex:
    """Pairing of a primal vector against an adjoint vector (biorthogonal coordinates)."""
    return DUALITY.state_pairing(primal.to_array(system), adjoint.to_array(system))


@dataclass(frozen=True, eq=False)
class ExponentialPolynomial:
    """Finite sum of terms e^{rate tau} P(tau) with array-valued polynomial coefficients.

    coefficients has shape (n_terms, degree + 1) + value_shape.
    """

    rates: np.ndarray
    coefficients: np.ndarray

    @property
    def value_shape(self) -> tuple:
        return tuple(self.coefficients.shape[2:])

    @property
    def max_rate(self) -> float:
        return float(np.max(np.abs(self.rates))) if self.rates.size else 0.0

    def evaluate(self, tau: np.ndarray) -> np.ndarray:
        """Values at tau, shape (len(tau),) + value_shape."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if self.rates.size == 0:
            return np.zeros((tau.size,) + self.value_shape, dtype=complex)
        exponentials = np.exp(np.outer(tau, self.rates))
        powers = tau[:, None] ** np.arange(self.coefficients.shape[1])[None, :]
        return np.einsum('nt,np,tp...->n...', exponentials, powers, self.coefficients)

    def derivative(self, order: int = 1) -> 'ExponentialPolynomial':
        """Derivative in tau, using d/dtau [e^{r tau} P] = e^{r tau} (r P + P')."""
        coefficients = self.coefficients
        expand = (slice(None), None) + (None,) * len(self.value_shape)
        for _ in range(order):
            shifted = np.zeros_like(coefficients)
            degree = coefficients.shape[1]
            if degree > 1:
                scale = np.arange(1, degree).reshape((1, -1) + (1,) * len(self.value_shape))
                shifted[:, :-1] = coefficients[:, 1:] * scale
            coefficients = self.rates[expand] * coefficients + shifted
        return ExponentialPolynomial(self.rates, coefficients)


def output_expansion(system: SpectralSystem, coefficients: np.ndarray) -> ExponentialPolynomial:
    """Closed form of tau -> B* S*_tau phi.

    Args:
        system: Spectral system
        coefficients: Adjoint coefficients, shape (n_modes,) or (n_modes,) + family_shape

    Returns:
        Expansion with value shape family_shape + (input_dim,)
    """
    coefficients = np.asarray(coefficients, dtype=complex)
    family_shape = coefficients.shape[1:]
    traces = system.traces
    blocks = system.chains()
    degree = max((len(block) for block in blocks), default=1)
    rates = np.array([system.eigenvalues[block[0]] for block in blocks], dtype=complex)
    terms = np.zeros((len(blocks), degree) + family_shape + (system.input_dim,), dtype=complex)
    for term, block in enumerate(blocks):
        length = len(block)
        for power in range(length):
            for i in range(length - power):
                terms[term, power] += np.multiply.outer(coefficients[block[i + power]],
                                                        traces[block[i]])
            terms[term, power] /= factorial(power)
    return ExponentialPolynomial(rates, terms)


def output_signal(system: SpectralSystem, coefficients: np.ndarray, horizon: float,
                  n_grid: int, reflected: bool = False) -> TimeSignal:
    """Closed-form TimeSignal of tau -> B* S*_tau phi, or of s -> B* S*_{T-s} phi."""
    expansion = output_expansion(system, coefficients)
    derivatives = [expansion.derivative(j) for j in range(1, OUTPUT_DERIVATIVE_ORDERS + 1)]

    if reflected:
        def evaluator(s: np.ndarray) -> np.ndarray:
            return expansion.evaluate(horizon - np.asarray(s))

        def make_derivative(j: int, expansion_j: ExponentialPolynomial):
            return lambda s: (-1.0) ** j * expansion_j.evaluate(horizon - np.asarray(s))
    else:
        evaluator = expansion.evaluate

        def make_derivative(j: int, expansion_j: ExponentialPolynomial):
            return expansion_j.evaluate

    return TimeSignal.from_function(
        horizon, evaluator, n_grid=n_grid,
        derivatives=[make_derivative(j, e) for j, e in enumerate(derivatives, start=1)],
        rate=expansion.max_rate,
    )


def check_observation_index(vector: TowerVector) -> None:
    """Raise InvalidTowerIndex unless B* can be applied to the vector."""
    if vector.side is not Side.ADJOINT:
        raise InvalidTowerIndex("observations are defined for adjoint-side vectors")
    if vector.tower_index < 1:
        raise InvalidTowerIndex(
            f"B* needs an adjoint vector in X_1 or higher, got index {vector.tower_index}")


def output_trajectory(system: SpectralSystem, phi: TowerVector, grid: np.ndarray) -> TimeSignal:
    """Observation t -> B* S*_t phi on the uniform grid [0, T]."""
    check_observation_index(phi)
    grid = np.asarray(grid, dtype=float)
    return output_signal(system, phi.to_array(system), float(grid[-1]), grid.size)


def exponential_integral(exponent: np.ndarray, horizon: float) -> np.ndarray:
    """Integral of e^{s t} over (0, horizon), stable near s = 0."""
    exponent = np.asarray(exponent, dtype=complex)
    small = np.abs(exponent) * horizon < 1e-12
    safe = np.where(small, 1.0, exponent)
    return np.where(small, horizon + exponent * horizon ** 2 / 2.0,
                    np.expm1(safe * horizon) / safe)


def exponential_sobolev_norm(eigenvalue: complex, order: int, horizon: float) -> float:
    """Closed-form H^order(0, T) norm of t -> e^{mu t}."""
    modulus = abs(eigenvalue) ** 2
    weight = sum(modulus ** j for j in range(order + 1))
    integral = exponential_integral(np.array([2.0 * eigenvalue.real]), horizon)[0].real
    return float(np.sqrt(weight * integral))


def output_gram(system: SpectralSystem, horizon: float, order: int = 0,
                indices: Optional[Sequence[int]] = None,
                input_basis: Optional[np.ndarray] = None) -> np.ndarray:
    """Gram matrix of the observations of unit adjoint vectors in H^order(0, T).

    Entry (a, b) is the H^order inner product of the observation of mode b against that
    of mode a, so phi^H G phi is the squared norm of the observation of phi.
    """
    if indices is None:
        positions = list(range(system.size))
    else:
        positions = [system.position(i) for i in indices]
    traces = system.traces
    if input_basis is not None:
        traces = traces @ np.conj(np.asarray(input_basis, dtype=complex))

    if not system.has_jordan_blocks:
        mu = system.eigenvalues[positions]
        b = traces[positions]
        exponent = np.conj(mu)[:, None] + mu[None, :]
        factor = sum((np.conj(mu)[:, None] * mu[None, :]) ** j for j in range(order + 1))
        return (np.conj(b) @ b.T) * factor * exponential_integral(exponent, horizon)

    unit = np.zeros((system.size, len(positions)), dtype=complex)
    unit[positions, np.arange(len(positions))] = 1.0
    expansion = output_expansion(system, unit)
    nodes, weights = gauss_legendre_rule(0.0, horizon, rate=expansion.max_rate,
                                         options=numerics_config.quadrature_options())
    gram = np.zeros((len(positions), len(positions)), dtype=complex)
    for j in range(order + 1):
        values = expansion.derivative(j).evaluate(nodes)
        if input_basis is not None:
            values = values @ np.conj(np.asarray(input_basis, dtype=complex))
        gram += np.einsum('n,nai,nbi->ab', weights, np.conj(values), values)
    return gram


def project_modes(system: SpectralSystem, vector: TowerVector,
                  indices: Iterable[int]) -> TowerVector:
    """Spectral projection keeping only the listed modes."""
    keep = set(indices)
    return TowerVector({k: (v if k in keep else 0.0) for k, v in vector.coefficients.items()},
                       vector.tower_index, vector.side)


def hyperbolic_indices(system: SpectralSystem) -> List[int]:
    """Labels of the modes tagged hyperbolic."""
    return [mode.index for mode in system.modes if mode.branch is Branch.HYPERBOLIC]


def project_hyperbolic(system: SpectralSystem, vector: TowerVector) -> TowerVector:
    """Projection P_h onto the hyperbolic branch."""
    return project_modes(system, vector, hyperbolic_indices(system))


def extremal_ratio(numerator: np.ndarray, denominator: np.ndarray,
                   component: str = 'spectral_core') -> float:
    """Square root of sup_a (a^H D a) / (a^H G a) for Hermitian D and G >= 0.

    G is Jacobi-scaled first; directions where G is numerically null are dropped with a
    warning, so the value is the extremum over the remaining subspace.

    Raises:
        DegenerateOutput: If G vanishes identically
    """
    numerator = np.asarray(numerator, dtype=complex)
    denominator = np.asarray(denominator, dtype=complex)
    diagonal = np.real(np.diag(denominator))
    if diagonal.size == 0 or not np.any(diagonal > 0.0):
        raise DegenerateOutput("the observation Gram matrix vanishes on the truncation")

    rcond = float(numerics_config.get('GRAM_RCOND'))
    live = diagonal > rcond * float(np.max(diagonal))
    scale = 1.0 / np.sqrt(diagonal[live])
    gram = scale[:, None] * denominator[np.ix_(live, live)] * scale[None, :]
    target = scale[:, None] * numerator[np.ix_(live, live)] * scale[None, :]

    eigenvalues, vectors = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    keep = eigenvalues > rcond * float(np.max(eigenvalues))
    dropped = int(np.sum(~live)) + int(np.sum(~keep))
    if dropped:
        app_logger.log_numerics_event(component, 'dropped near-null Gram directions',
                                      f"{dropped} of {diagonal.size}")
    whitening = vectors[:, keep] / np.sqrt(eigenvalues[keep])[None, :]
    reduced = whitening.conj().T @ target @ whitening
    largest = float(np.max(np.linalg.eigvalsh(0.5 * (reduced + reduced.conj().T))))
    return float(np.sqrt(max(largest, 0.0)))
