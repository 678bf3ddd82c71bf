"""Time Function Spaces Service

This module pairs generalized inputs against test functions on (0, T), and computes
H^M norms, truncated (H^M)* / H^-1 dual norms and the square-integrable but locally
non-L^p weight used to build derivative-type inputs.

Pairings are anti-linear in the test function: (u, v)_U = sum_i u_i conj(v_i).
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import qmc

from errors import EndpointObstruction, InvalidTowerIndex
from logger import app_logger
from models.time_signal import DualSpaceTag, GeneralizedInput, TimeSignal
from quadrature import gauss_legendre_rule, integrate
from .numerics_config import numerics_config

PairValue = Union[complex, np.ndarray]


def _contract(u: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """(u, phi)_U over the last axis with the family axes of phi kept."""
    return np.einsum('ni,n...i->n...', u, np.conj(phi))


def _as_result(value: np.ndarray) -> PairValue:
    value = np.asarray(value)
    return complex(value) if value.ndim == 0 else value


def check_endpoint_traces(phi: TimeSignal) -> None:
    """Raise EndpointObstruction if phi does not vanish at 0 and T."""
    tolerance = float(numerics_config.get('ENDPOINT_TOLERANCE'))
    traces = phi.endpoint_values()
    for endpoint, values in zip((0.0, phi.horizon), traces):
        size = float(np.max(np.abs(values))) if values.size else 0.0
        if size > tolerance:
            raise EndpointObstruction(
                f"test function has trace {size:.3e} at t={endpoint:g}; "
                f"H^-1 pairings need zero traces", trace=size, endpoint=endpoint)


def pair(u: GeneralizedInput, phi: TimeSignal,
         tag: DualSpaceTag = DualSpaceTag.FULL_DUAL,
         upper: Optional[float] = None) -> PairValue:
    """Anti-dual pairing <u, phi> of a generalized input against a test function.

    Args:
        u: Generalized input
        phi: Test function; its leading value axes may index a family of test functions
        tag: Dual space the pairing is taken in
        upper: If given, pair u restricted to the closed interval [0, upper]

    Returns:
        Pairing value, an array over the family axes of phi when present

    Raises:
        EndpointObstruction: If tag is zero-trace and phi or an atom sits on the boundary
        InvalidTowerIndex: If u needs an H^1 test function and phi has no derivative
    """
    if phi.input_dim != u.input_dim:
        raise ValueError(
            f"input dimension {u.input_dim} differs from test dimension {phi.input_dim}")
    if u.dual_index < 0 and not phi.has_derivative(1):
        raise InvalidTowerIndex("inputs with atoms or derivative parts need an H^1 test function")

    horizon = u.horizon
    if tag is DualSpaceTag.ZERO_TRACE_DUAL:
        check_endpoint_traces(phi)
        tolerance = 1e-14 * horizon
        for atom in u.atoms:
            if atom.t0 <= tolerance or atom.t0 >= horizon - tolerance:
                raise EndpointObstruction(
                    f"atom at t={atom.t0:g} sits on the boundary of (0, {horizon:g})",
                    trace=float(np.linalg.norm(atom.u0)), endpoint=atom.t0)

    end = horizon if upper is None else float(upper)
    total = np.zeros(phi.value_shape[:-1], dtype=complex)

    if u.density is not None and end > 0.0:
        density = u.density
        nodes, weights = gauss_legendre_rule(
            0.0, end,
            breakpoints=density.breakpoints + phi.breakpoints,
            singular_points=density.singular_points + phi.singular_points,
            rate=max(density.rate, phi.rate),
            options=numerics_config.quadrature_options())
        total = total + integrate(_contract(density.evaluate(nodes), phi.evaluate(nodes)), weights)

    for atom in u.atoms:
        if atom.t0 <= end:
            total = total + _contract(atom.u0[None, :], phi.evaluate([atom.t0]))[0]

    for part in u.derivative_parts:
        if end > 0.0:
            nodes, weights = gauss_legendre_rule(
                0.0, end,
                breakpoints=part.g.breakpoints + phi.breakpoints,
                singular_points=part.g.singular_points + phi.singular_points,
                rate=max(part.g.rate, phi.rate),
                options=numerics_config.quadrature_options())
            g_values = part.g.evaluate(nodes)[:, 0]
            inner = _contract(np.broadcast_to(part.u0, (nodes.size, part.u0.size)),
                              phi.derivative(nodes, 1))
            integrand = inner * g_values.reshape((-1,) + (1,) * (inner.ndim - 1))
            total = total + integrate(integrand, weights)
        if upper is not None:
            # -g' restricted to [0, t] leaves the boundary term -g(t) (u0, phi(t))
            g_end = part.g.evaluate([end])[0, 0]
            total = total - g_end * _contract(part.u0[None, :], phi.evaluate([end]))[0]

    return _as_result(total)


def _integrate_squares(phi: TimeSignal, order: int) -> float:
    nodes, weights = gauss_legendre_rule(0.0, phi.horizon, breakpoints=phi.breakpoints,
                                         singular_points=phi.singular_points, rate=phi.rate,
                                         options=numerics_config.quadrature_options())
    total = 0.0
    for j in range(order + 1):
        values = phi.derivative(nodes, j).reshape(nodes.size, -1)
        total += float(np.real(integrate(np.sum(np.abs(values) ** 2, axis=1), weights)))
    return total


def sobolev_norm(phi: TimeSignal, order: int) -> float:
    """H^order(0, T; U) norm of a signal.

    Cosine series use the diagonal weights of the cosine basis; closed-form signals and
    piecewise-linear samples use composite Gauss-Legendre quadrature.

    Raises:
        InvalidTowerIndex: If order is negative or the signal lacks the derivatives
    """
    if order < 0:
        raise InvalidTowerIndex(f"Sobolev order must be nonnegative, got {order}")
    if phi.cosine_coefficients is not None:
        coefficients = phi.cosine_coefficients.reshape(phi.cosine_coefficients.shape[0], -1)
        m = np.arange(coefficients.shape[0])
        omega = m * np.pi / phi.horizon
        normalization = np.where(m == 0, phi.horizon, phi.horizon / 2.0)
        weights = sum(omega ** (2 * j) for j in range(order + 1))
        energy = np.sum(np.abs(coefficients) ** 2, axis=1)
        return float(np.sqrt(np.sum(energy * normalization * weights)))
    if not phi.has_derivative(order):
        raise InvalidTowerIndex(f"signal carries no derivative of order {order}")
    return float(np.sqrt(_integrate_squares(phi, order)))


def sobolev_inner_gram(family: TimeSignal, order: int) -> np.ndarray:
    """Gram matrix of a family of test functions in H^order.

    The family index is the first value axis; entry (a, b) is the inner product of member
    b against member a, so c^H G c is the squared norm of sum_a c_a phi_a.
    """
    if not family.has_derivative(order):
        raise InvalidTowerIndex(f"family carries no derivative of order {order}")
    nodes, weights = gauss_legendre_rule(0.0, family.horizon, breakpoints=family.breakpoints,
                                         singular_points=family.singular_points,
                                         rate=family.rate,
                                         options=numerics_config.quadrature_options())
    size = family.value_shape[0]
    gram = np.zeros((size, size), dtype=complex)
    for j in range(order + 1):
        values = family.derivative(nodes, j).reshape(nodes.size, size, -1)
        gram += np.einsum('n,nai,nbi->ab', weights, np.conj(values), values)
    return gram


def trigonometric_family(horizon: float, n_basis: int, input_dim: int,
                         tag: DualSpaceTag) -> Tuple[TimeSignal, np.ndarray]:
    """Test family e_m(t) * unit vector, with the H^M-diagonal basis of the tagged space.

    Cosines cos(m pi t / T), m = 0..n_basis-1, for the full dual; sines sin(m pi t / T),
    m = 1..n_basis, for the zero-trace dual.

    Returns:
        Tuple of (family signal with value shape (n_basis, dim, dim), frequencies)
    """
    if tag is DualSpaceTag.FULL_DUAL:
        omega = np.arange(n_basis) * np.pi / horizon
        shift = 0.0
    else:
        omega = np.arange(1, n_basis + 1) * np.pi / horizon
        shift = -np.pi / 2.0
    identity = np.eye(input_dim)

    def derivative(order: int):
        def evaluate(t: np.ndarray) -> np.ndarray:
            t = np.atleast_1d(np.asarray(t, dtype=float))
            scalar = omega ** order * np.cos(np.outer(t, omega) + shift + order * np.pi / 2.0)
            return scalar[:, :, None, None] * identity[None, None, :, :]
        return evaluate

    signal = TimeSignal.from_function(
        horizon, derivative(0), n_grid=2,
        derivatives=[derivative(j) for j in range(1, 9)],
        rate=float(omega[-1]) if n_basis else 0.0)
    return signal, omega


def trigonometric_weights(horizon: float, omega: np.ndarray, order: int) -> np.ndarray:
    """Squared H^order norms of the trigonometric test modes of frequency omega."""
    normalization = np.where(omega == 0.0, horizon, horizon / 2.0)
    return normalization * sum(omega ** (2 * j) for j in range(order + 1))


def dual_norm(u: GeneralizedInput, order: int,
              tag: DualSpaceTag = DualSpaceTag.FULL_DUAL, n_basis: int = 256) -> float:
    """Truncated dual norm of u in (H^order)* over the first n_basis trigonometric modes.

    The cosine (or sine) modes are orthogonal in every H^order inner product, so the
    supremum over their span is a weighted sum of squared pairings. The value is
    nondecreasing in n_basis.

    Raises:
        InvalidTowerIndex: If order is negative, or zero while u is not a density
        EndpointObstruction: As in pair for the zero-trace dual
    """
    if order < 0:
        raise InvalidTowerIndex(f"dual order must be nonnegative, got {order}")
    if order == 0:
        if not u.is_regular:
            raise InvalidTowerIndex("only L2 densities have a finite L2 dual norm")
        return sobolev_norm(u.density, 0) if u.density is not None else 0.0

    family, omega = trigonometric_family(u.horizon, n_basis, u.input_dim, tag)
    pairings = np.asarray(pair(u, family, tag)).reshape(n_basis, -1)
    weights = trigonometric_weights(u.horizon, omega, order)
    return float(np.sqrt(np.sum(np.abs(pairings) ** 2 / weights[:, None])))


def whitened_quadratic_form(pairings: np.ndarray, gram: np.ndarray) -> float:
    """p^H G^+ p with near-null directions of G dropped."""
    rcond = float(numerics_config.get('GRAM_RCOND'))
    diagonal = np.real(np.diag(gram))
    live = diagonal > 0.0
    if not np.any(live):
        return 0.0
    scale = 1.0 / np.sqrt(diagonal[live])
    pairings = np.asarray(pairings)[live] * scale
    gram = scale[:, None] * gram[np.ix_(live, live)] * scale[None, :]
    eigenvalues, vectors = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    largest = float(np.max(eigenvalues)) if eigenvalues.size else 0.0
    if largest <= 0.0:
        return 0.0
    keep = eigenvalues > rcond * largest
    if not np.all(keep):
        app_logger.log_numerics_event(
            'time_function_spaces', 'dropped near-null Gram directions',
            f"{int(np.sum(~keep))} of {keep.size}")
    projected = vectors[:, keep].conj().T @ pairings
    return float(np.real(np.sum(np.abs(projected) ** 2 / eigenvalues[keep])))


def dual_norm_on_subspace(u: GeneralizedInput, family: TimeSignal, order: int,
                          tag: DualSpaceTag = DualSpaceTag.FULL_DUAL) -> float:
    """Dual norm of u restricted to the span of an arbitrary test family.

    Returns sqrt(p^H G^-1 p) with p the pairings against the family and G its H^order Gram.
    """
    pairings = np.asarray(pair(u, family, tag)).reshape(-1)
    gram = sobolev_inner_gram(family, order)
    return float(np.sqrt(whitened_quadratic_form(pairings, gram)))


@dataclass(frozen=True, eq=False)
class PathologicalAlpha:
    """alpha(t) = sum_j 2^-j |t - q_j|^(-1/2) (1 + |log|t - q_j||)^-1 on (0, T).

    alpha is square integrable, but no L^p norm with p > 2 is finite near any q_j.
    """

    horizon: float
    centers: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return 2.0 ** -np.arange(1, self.centers.size + 1)

    @staticmethod
    def _profile(distance: np.ndarray) -> np.ndarray:
        return distance ** -0.5 / (1.0 + np.abs(np.log(distance)))

    def evaluate(self, t: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """Values at t and flags marking points where the singular value was capped."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        floor = float(numerics_config.get('ALPHA_DISTANCE_FLOOR'))
        values = np.zeros(t.size)
        capped = np.zeros(t.size, dtype=bool)
        for weight, center in zip(self.weights, self.centers):
            distance = np.abs(t - center)
            hit = distance < floor
            capped |= hit
            values += weight * self._profile(np.maximum(distance, floor))
        return values, capped

    def __call__(self, t: Sequence[float]) -> np.ndarray:
        return self.evaluate(t)[0]

    def _values_at_offset(self, j: int, offsets: np.ndarray, side: float) -> np.ndarray:
        # Term j is evaluated from the exact offset so tiny distances keep full precision
        floor = float(numerics_config.get('ALPHA_DISTANCE_FLOOR'))
        values = self.weights[j] * self._profile(offsets)
        points = self.centers[j] + side * offsets
        for i, (weight, center) in enumerate(zip(self.weights, self.centers)):
            if i != j:
                values += weight * self._profile(np.maximum(np.abs(points - center), floor))
        return values

    def local_lp_integral(self, j: int, radius: float, excision: float, p: float) -> float:
        """Integral of |alpha|^p over excision <= |t - q_j| <= radius inside (0, T).

        Uses the substitution |t - q_j| = e^s, which turns the algebraic singularity into
        smooth exponential growth in s.
        """
        center = float(self.centers[j])
        total = 0.0
        for side, room in ((-1.0, center), (1.0, self.horizon - center)):
            upper = min(radius, room)
            if upper <= excision:
                continue
            s_nodes, s_weights = gauss_legendre_rule(
                np.log(excision), np.log(upper), options=numerics_config.quadrature_options())
            offsets = np.exp(s_nodes)
            values = self._values_at_offset(j, offsets, side)
            total += float(np.sum(s_weights * offsets * np.abs(values) ** p))
        return total

    def as_signal(self, n_grid: int = 257) -> TimeSignal:
        """Scalar closed-form signal with the singular points marked for quadrature."""
        return TimeSignal.from_function(self.horizon, self.__call__, n_grid=n_grid,
                                        smoothness_index=0,
                                        singular_points=tuple(float(q) for q in self.centers))


def sample_alpha_pathological(horizon: float, seed: int = 0,
                              n_points: int = 8) -> PathologicalAlpha:
    """Build the pathological weight with singularities on a low-discrepancy set.

    The centers are the first n_points nonzero points of the base-2 van der Corput
    sequence scaled to (0, T); a nonzero seed applies a random Cranley-Patterson shift.
    """
    if n_points < 0 or n_points > 32:
        raise ValueError(f"n_points must lie in [0, 32], got {n_points}")
    if n_points == 0:
        return PathologicalAlpha(float(horizon), np.zeros(0))
    unit = qmc.Halton(d=1, scramble=False).random(n_points + 1)[1:, 0]
    if seed:
        shift = np.random.default_rng(seed).random()
        unit = np.mod(unit + shift, 1.0)
        unit = np.where(unit == 0.0, 0.5 / (n_points + 1), unit)
    return PathologicalAlpha(float(horizon), unit * horizon)
