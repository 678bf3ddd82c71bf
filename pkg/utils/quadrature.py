"""Composite Gauss-Legendre Quadrature

This module builds node/weight arrays for composite Gauss-Legendre rules on an interval.
Panels are aligned with caller-supplied breakpoints (grid nodes, kinks, atoms), refined
for exponential content with a known rate, and graded geometrically towards integrable
endpoint singularities.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class QuadratureOptions:
    """Panel layout of a composite rule."""

    panels: int = 64
    order: int = 16
    rate_per_panel: float = 4.0
    grading_ratio: float = 0.15
    grading_levels: int = 40


DEFAULT_OPTIONS = QuadratureOptions()


@lru_cache(maxsize=32)
def _reference_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _graded_edges(left: float, right: float, towards_left: bool,
                  ratio: float, levels: int) -> np.ndarray:
    """Panel edges on [left, right] shrinking geometrically towards one end."""
    length = right - left
    offsets = length * ratio ** np.arange(levels + 1)
    if towards_left:
        inner = left + offsets[::-1]
        return np.concatenate(([left], inner))
    inner = right - offsets
    return np.concatenate((inner, [right]))


def gauss_legendre_rule(a: float, b: float,
                        breakpoints: Iterable[float] = (),
                        singular_points: Iterable[float] = (),
                        rate: float = 0.0,
                        panels: Optional[int] = None,
                        order: Optional[int] = None,
                        options: Optional[QuadratureOptions] = None,
                        ) -> Tuple[np.ndarray, np.ndarray]:
    """Composite rule on [a, b].

    Args:
        a: Left end
        b: Right end
        breakpoints: Points where the integrand may have kinks or jumps
        singular_points: Points where the integrand has an integrable singularity
        rate: Largest exponential rate |mu| present in the integrand
        panels: Base panel count, overrides options.panels
        order: Nodes per panel, overrides options.order
        options: Panel layout, DEFAULT_OPTIONS when omitted

    Returns:
        Tuple of (nodes, weights)
    """
    if b <= a:
        return np.zeros(0), np.zeros(0)

    options = options or DEFAULT_OPTIONS
    panels = int(panels or options.panels)
    order = int(order or options.order)
    per_panel = float(options.rate_per_panel)
    ratio = float(options.grading_ratio)
    levels = int(options.grading_levels)

    length = b - a
    if rate > 0.0:
        panels = max(panels, int(np.ceil(rate * length / per_panel)))

    singular = sorted({float(p) for p in singular_points if a <= p <= b})
    cuts = [float(p) for p in breakpoints if a < p < b]
    edges = np.unique(np.concatenate((np.linspace(a, b, panels + 1), cuts, singular)))
    keep = np.concatenate(([True], np.diff(edges) > 1e-14 * length))
    edges = edges[keep]
    edges[-1] = b

    singular_arr = np.asarray(singular)
    pieces = []
    for left, right in zip(edges[:-1], edges[1:]):
        tolerance = 1e-14 * length
        near_left = singular_arr.size > 0 and np.any(np.abs(singular_arr - left) <= tolerance)
        near_right = singular_arr.size > 0 and np.any(np.abs(singular_arr - right) <= tolerance)
        if near_left and near_right:
            mid = 0.5 * (left + right)
            pieces.append(_graded_edges(left, mid, True, ratio, levels))
            pieces.append(_graded_edges(mid, right, False, ratio, levels))
        elif near_left:
            pieces.append(_graded_edges(left, right, True, ratio, levels))
        elif near_right:
            pieces.append(_graded_edges(left, right, False, ratio, levels))
        else:
            pieces.append(np.array([left, right]))

    lefts = np.concatenate([p[:-1] for p in pieces])
    rights = np.concatenate([p[1:] for p in pieces])
    ref_nodes, ref_weights = _reference_rule(order)
    half = 0.5 * (rights - lefts)
    mid = 0.5 * (rights + lefts)
    nodes = (mid[:, None] + half[:, None] * ref_nodes[None, :]).ravel()
    weights = (half[:, None] * ref_weights[None, :]).ravel()
    return nodes, weights


def integrate(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Contract sampled values (nodes on the first axis) with quadrature weights."""
    return np.tensordot(weights, values, axes=(0, 0))
