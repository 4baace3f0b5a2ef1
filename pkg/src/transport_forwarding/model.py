"""Plant constants, input nonlinearities, the feedback gain profile, grid and state.

The plant is a scalar ODE ``z' = -a z + sigma(u)`` feeding the inflow boundary
of a unit-interval transport equation ``w_t + lam w_x = 0`` through
``w(t,0) = w(t,1) + gamma z(t)``.  The feedback gain profile solves
``a M = lam M'`` with ``M(0) = M(1) + gamma`` and has the closed form
``M(x) = gamma exp(a x / lam) / (1 - exp(a / lam))``.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

__all__ = [
    "Params",
    "ConeBounded",
    "Linear",
    "Saturation",
    "Arctan",
    "make_sigma",
    "Grid",
    "GainProfile",
    "State",
    "build_gain",
    "gain_residual",
    "compatibility_defect",
    "compatibility_tol",
    "is_compatible",
    "random_smooth_profile",
    "random_fundamental_state",
    "random_compatible_state",
]


@dataclasses.dataclass(frozen=True)
class Params:
    """Plant and controller constants.

    a: decay rate of the z-ODE, > 0.
    lam: transport velocity, > 0 (x = 0 is the inflow boundary).
    gamma: boundary coupling gain.  gamma = 0 decouples the PDE from the
        ODE (the gain profile degenerates to 0); it is accepted so the
        conservation/decoupling diagnostics can run.
    mu: feedback gain, > 0.
    """

    a: float
    lam: float
    gamma: float
    mu: float

    def __post_init__(self):
        for name in ("a", "lam", "gamma", "mu"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.a <= 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.mu <= 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")


class ConeBounded:
    """Base class for the input nonlinearity catalog.

    Instances are callables vanishing exactly at 0, nondecreasing, and
    globally Lipschitz with constant ``m`` (the slope at the origin for
    every catalog entry).
    """

    m: float

    def __call__(self, s):
        raise NotImplementedError


@dataclasses.dataclass(frozen=True)
class Linear(ConeBounded):
    """sigma(s) = rho * s with rho > 0."""

    rho: float

    def __post_init__(self):
        if not (self.rho > 0):
            raise ValueError(f"Linear needs rho > 0, got {self.rho}")
        object.__setattr__(self, "m", abs(self.rho))

    def __call__(self, s):
        return self.rho * np.asarray(s, dtype=float)


@dataclasses.dataclass(frozen=True)
class Saturation(ConeBounded):
    """sigma(s) = rho * clip(s, s1, s2) with rho > 0 and s1 < 0 < s2.

    s1 < 0 < s2 is required so that sigma vanishes only at 0.
    """

    rho: float
    s1: float
    s2: float

    def __post_init__(self):
        if not (self.rho > 0):
            raise ValueError(f"Saturation needs rho > 0, got {self.rho}")
        if not (self.s1 < 0 < self.s2):
            raise ValueError(
                f"Saturation needs s1 < 0 < s2, got s1={self.s1}, s2={self.s2}"
            )
        object.__setattr__(self, "m", self.rho)

    def __call__(self, s):
        return self.rho * np.clip(np.asarray(s, dtype=float), self.s1, self.s2)


@dataclasses.dataclass(frozen=True)
class Arctan(ConeBounded):
    """sigma(s) = theta * arctan(rho * s) with theta * rho > 0."""

    theta: float
    rho: float

    def __post_init__(self):
        if not (self.theta * self.rho > 0):
            raise ValueError(
                f"Arctan needs theta*rho > 0, got theta={self.theta}, rho={self.rho}"
            )
        object.__setattr__(self, "m", self.theta * self.rho)

    def __call__(self, s):
        return self.theta * np.arctan(self.rho * np.asarray(s, dtype=float))


def make_sigma(kind: str, **coef) -> ConeBounded:
    """Build a catalog nonlinearity from a config-style description."""
    kind = kind.strip().lower()
    if kind == "linear":
        return Linear(rho=coef.get("rho", 1.0))
    if kind == "saturation":
        return Saturation(
            rho=coef.get("rho", 1.0), s1=coef.get("s1", -1.0), s2=coef.get("s2", 1.0)
        )
    if kind == "arctan":
        return Arctan(theta=coef.get("theta", 1.0), rho=coef.get("rho", 1.0))
    raise ValueError(f"unknown sigma kind {kind!r}")


@dataclasses.dataclass(frozen=True)
class Grid:
    """Uniform node grid on [0, 1]: x_i = i/n for i = 0..n."""

    n: int
    dx: float = dataclasses.field(init=False)
    nodes: np.ndarray = dataclasses.field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs an integer n >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "dx", 1.0 / self.n)
        nodes = np.linspace(0.0, 1.0, self.n + 1)
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)


@dataclasses.dataclass(frozen=True)
class GainProfile:
    """The feedback gain sampled at the grid nodes."""

    samples: np.ndarray
    params: Params
    grid: Grid

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.shape != (self.grid.n + 1,):
            raise ValueError(
                f"gain samples must have {self.grid.n + 1} entries, got {samples.shape}"
            )
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)


def build_gain(params: Params, grid: Grid) -> GainProfile:
    """Sample the closed-form gain profile at the grid nodes.

    Satisfies M(0) - M(1) = gamma identically and gamma*M(x) < 0 whenever
    gamma != 0 (the exponent ratio a/lam is positive, so 1 - exp(a/lam) < 0).
    """
    r = params.a / params.lam
    samples = params.gamma * np.exp(r * grid.nodes) / (1.0 - math.exp(r))
    return GainProfile(samples=samples, params=params, grid=grid)


def gain_residual(gain: GainProfile) -> float:
    """Max interior defect |a M - lam M'| with M' the centered difference.

    Second order in dx for the closed-form profile.
    """
    if gain.grid.n < 4:
        raise ValueError("residual needs a grid with n >= 4")
    m = gain.samples
    dm = (m[2:] - m[:-2]) / (2.0 * gain.grid.dx)
    res = gain.params.a * m[1:-1] - gain.params.lam * dm
    return float(np.max(np.abs(res)))


@dataclasses.dataclass(frozen=True)
class State:
    """A point (z, w) of the coupled system at time t; w holds n+1 nodal values."""

    z: float
    w: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("w must be a 1-D nodal array with at least 2 entries")
        if not math.isfinite(self.z) or not np.isfinite(w).all():
            raise ValueError("state entries must be finite")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "z", float(self.z))
        object.__setattr__(self, "t", float(self.t))


def compatibility_defect(state: State, gamma: float) -> float:
    """|w(0) - w(1) - gamma z|, the distance to the boundary relation."""
    return float(abs(state.w[0] - state.w[-1] - gamma * state.z))


def compatibility_tol(state: State, gamma: float) -> float:
    """State-scaled tolerance for the discrete boundary relation."""
    return 1e-9 * (1.0 + abs(gamma * state.z) + abs(state.w[0]) + abs(state.w[-1]))


def is_compatible(state: State, gamma: float) -> bool:
    return compatibility_defect(state, gamma) <= compatibility_tol(state, gamma)


def random_smooth_profile(rng: np.random.Generator, nodes: np.ndarray, modes: int = 3):
    """A random low-frequency field: a few Fourier modes plus a linear part."""
    w = np.zeros_like(nodes)
    for k in range(1, modes + 1):
        amp = 1.0 / k**2
        w += amp * rng.normal() * np.sin(2.0 * np.pi * k * nodes)
        w += amp * rng.normal() * np.cos(2.0 * np.pi * k * nodes)
    w += rng.normal() * nodes + rng.normal()
    return w


def random_fundamental_state(rng: np.random.Generator, grid: Grid) -> State:
    """Random affine-plus-fundamental-mode state.

    Curvature is bounded by (2 pi)^2 times the field scale, so second-order
    interpolation residuals stay within a provable constant of dx^2 for
    every draw; used by the shifted-inverse identity checks.
    """
    x = grid.nodes
    w = (
        rng.normal() * x
        + rng.normal()
        + rng.normal() * np.sin(2.0 * np.pi * x)
        + rng.normal() * np.cos(2.0 * np.pi * x)
    )
    return State(z=rng.normal(), w=w)


def random_compatible_state(
    rng: np.random.Generator,
    grid: Grid,
    gamma: float,
    scale: float = 1.0,
    modes: int = 3,
    t: float = 0.0,
) -> State:
    """Random smooth state satisfying the boundary relation at the nodes.

    The ramp -x carries a unit boundary jump (psi(0) - psi(1) = 1), so adding
    (gamma z - jump(v)) * (-x) enforces w(0) - w(1) = gamma z exactly.
    """
    z = scale * rng.normal()
    v = scale * random_smooth_profile(rng, grid.nodes, modes=modes)
    jump = v[0] - v[-1]
    w = v + (gamma * z - jump) * (-grid.nodes)
    return State(z=z, w=w, t=t)
