"""Discrete function-space numerics.

Composite-trapezoid quadrature on the node grid, the weighted state norm
``a z^2 + mu m ||w - M z||^2`` used as the closed-loop Lyapunov function,
the feedback value, and the two transport energies.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .model import ConeBounded, GainProfile, Grid, Params, State

__all__ = [
    "Quadrature",
    "l2_inner",
    "feedback_u",
    "x_inner",
    "state_norm_sq",
    "energy_e1",
    "energy_e2",
    "h1_seminorm_sq",
    "norm_equivalence_bounds",
]


@dataclasses.dataclass(frozen=True)
class Quadrature:
    """Composite trapezoid rule over the grid nodes.

    Exact for piecewise-linear integrands, which is all the node-based
    solvers produce.  The e^{-x} weight for the decaying energy is cached.
    """

    grid: Grid
    weights: np.ndarray = dataclasses.field(init=False, repr=False, compare=False)
    exp_weights: np.ndarray = dataclasses.field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = np.full(self.grid.n + 1, self.grid.dx)
        w[0] *= 0.5
        w[-1] *= 0.5
        w.flags.writeable = False
        ew = np.exp(-self.grid.nodes)
        ew.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "exp_weights", ew)

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(self.weights @ (f * g))


def _check_size(arr: np.ndarray, q: Quadrature, name: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if arr.shape != (q.grid.n + 1,):
        raise ValueError(f"{name} has shape {arr.shape}, expected ({q.grid.n + 1},)")
    return arr


def l2_inner(f: np.ndarray, g: np.ndarray, q: Quadrature) -> float:
    """Trapezoid approximation of the L2(0,1) inner product."""
    f = _check_size(f, q, "f")
    g = _check_size(g, q, "g")
    return q.inner(f, g)


def feedback_u(state: State, gain: GainProfile, params: Params, q: Quadrature) -> float:
    """The control value mu * <w - M z, M>."""
    w = _check_size(state.w, q, "state.w")
    m = _check_size(gain.samples, q, "gain")
    return params.mu * (q.inner(w, m) - state.z * q.inner(m, m))


def x_inner(
    z1: float,
    w1: np.ndarray,
    z2: float,
    w2: np.ndarray,
    gain: GainProfile,
    params: Params,
    sigma: ConeBounded,
    q: Quadrature,
) -> float:
    """Weighted state-space pairing a z1 z2 + mu m <w1 - M z1, w2 - M z2>."""
    w1 = _check_size(w1, q, "w1")
    w2 = _check_size(w2, q, "w2")
    m = gain.samples
    return params.a * z1 * z2 + params.mu * sigma.m * q.inner(
        w1 - m * z1, w2 - m * z2
    )


def state_norm_sq(
    state: State,
    gain: GainProfile,
    params: Params,
    sigma: ConeBounded,
    q: Quadrature,
) -> float:
    """Weighted squared state norm a z^2 + mu m ||w - M z||^2.

    Nonnegative, and zero only at the origin: the gain never vanishes, so
    w = M z together with z = 0 forces w = 0.
    """
    w = _check_size(state.w, q, "state.w")
    m = _check_size(gain.samples, q, "gain")
    dev = w - gain.samples * state.z
    return params.a * state.z**2 + params.mu * sigma.m * q.inner(dev, dev)


def energy_e1(w: np.ndarray, q: Quadrature) -> float:
    """Flat transport energy: integral of w^2."""
    w = _check_size(w, q, "w")
    return q.inner(w, w)


def energy_e2(w: np.ndarray, q: Quadrature) -> float:
    """Exponentially weighted energy: integral of e^{-x} w^2.

    Satisfies e^{-1} E1 <= E2 <= E1.
    """
    w = _check_size(w, q, "w")
    return float(q.weights @ (q.exp_weights * w * w))


def h1_seminorm_sq(w: np.ndarray, grid: Grid) -> float:
    """Finite-difference integral of (w')^2.  Plotting diagnostic only."""
    w = np.asarray(w, dtype=float)
    dw = np.diff(w) / grid.dx
    return float(np.sum(dw * dw) * grid.dx)


def norm_equivalence_bounds(
    params: Params, sigma: ConeBounded, gain: GainProfile, q: Quadrature
) -> tuple[float, float]:
    """Constants c1, c2 with c1 (z^2 + ||w||^2) <= V <= c2 (z^2 + ||w||^2).

    Young's inequality on the cross term, splitting with t = 2 mu m ||M||^2 / a
    so the z^2 coefficient keeps half of a.
    """
    mm = params.mu * sigma.m
    msq = q.inner(gain.samples, gain.samples)
    c2 = max(params.a + 2.0 * mm * msq, 2.0 * mm)
    t = 2.0 * mm * msq / params.a
    c1 = min(params.a / 2.0, mm / (1.0 + t))
    return c1, c2
