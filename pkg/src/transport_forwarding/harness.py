"""Experiment configuration, presets, runs, cross-solver comparison, and the
limit-behavior diagnostics.

Config files are INI-style (configparser).  A file may start from a named
preset via ``[experiment] preset = ...``; any explicitly given key then
overrides the preset value.  Sections and keys:

    [experiment] preset
    [plant]      a, lambda, gamma, mu
    [sigma]      kind (linear|saturation|arctan), rho, theta, s1, s2
    [initial]    z0, w0 (profile expression, see profiles module)
    [solver]     method (characteristics|upwind|implicit), n, dt, h, t_end
    [output]     path, snapshots (comma-separated times)
"""

from __future__ import annotations

import configparser
import dataclasses
import math

import numpy as np

from . import characteristics, generator, upwind
from .errors import ConfigError
from .model import (
    ConeBounded,
    Grid,
    Params,
    build_gain,
    make_sigma,
)
from .profiles import Profile, as_profile, parse_profile
from .spaces import Quadrature
from .trajectory import RunSummary, Trajectory, summarize, write_csv

__all__ = [
    "ExperimentConfig",
    "PRESETS",
    "preset_config",
    "parse_config",
    "run",
    "compare",
    "CompareReport",
    "lasalle_check",
    "LasalleReport",
    "zero_inflow_energies",
]

_SOLVERS = ("characteristics", "upwind", "implicit")


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """One reproducible run: plant, nonlinearity, initial data, solver."""

    params: Params
    sigma: ConeBounded
    z0: float
    w0: Profile
    solver: str = "characteristics"
    n: int = 200
    dt: float = 1e-3
    h: float = 0.01
    t_end: float = 10.0
    output: str | None = None
    snapshots: tuple[float, ...] = ()

    def __post_init__(self):
        if self.solver not in _SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; choose from {_SOLVERS}")
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        for name in ("dt", "h", "t_end"):
            if not (getattr(self, name) > 0):
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


# Built-in experiments.  "paper-fig" is the benchmark configuration the
# acceptance suite regresses against.
_PRESET_FIELDS: dict[str, dict] = {
    "paper-fig": dict(
        plant=dict(a=1.0, lam=1.0, gamma=1.0, mu=1.0),
        sigma=dict(kind="arctan", theta=1.0, rho=1.0),
        z0=1.0,
        w0="sin(1) - poly(1)",
        solver="characteristics",
        n=200,
        dt=1e-3,
        t_end=100.0,
        note="benchmark decay run (arctan input, z0=1, w0=sin(2 pi x)-x)",
    ),
    "paper-fig-upwind": dict(
        plant=dict(a=1.0, lam=1.0, gamma=1.0, mu=1.0),
        sigma=dict(kind="arctan", theta=1.0, rho=1.0),
        z0=1.0,
        w0="sin(1) - poly(1)",
        solver="upwind",
        n=400,
        dt=1.0 / 800.0,
        t_end=10.0,
        note="benchmark initial data on the upwind solver (CFL 0.5)",
    ),
    "paper-fig-implicit": dict(
        plant=dict(a=1.0, lam=1.0, gamma=1.0, mu=1.0),
        sigma=dict(kind="arctan", theta=1.0, rho=1.0),
        z0=1.0,
        w0="sin(1) - poly(1)",
        solver="implicit",
        n=200,
        h=0.01,
        t_end=10.0,
        note="benchmark initial data on the backward-Euler stepper",
    ),
    "advect-sine": dict(
        plant=dict(a=1.0, lam=1.0, gamma=0.0, mu=1.0),
        sigma=dict(kind="arctan", theta=1.0, rho=1.0),
        z0=0.0,
        w0="sin(1)",
        solver="characteristics",
        n=200,
        dt=1e-3,
        t_end=5.0,
        note="decoupled periodic advection; flat energy is conserved",
    ),
    "zero": dict(
        plant=dict(a=1.0, lam=1.0, gamma=1.0, mu=1.0),
        sigma=dict(kind="arctan", theta=1.0, rho=1.0),
        z0=0.0,
        w0="0",
        solver="characteristics",
        n=200,
        dt=1e-3,
        t_end=1.0,
        note="origin equilibrium; everything stays identically zero",
    ),
}

PRESETS = tuple(sorted(_PRESET_FIELDS))


def preset_note(name: str) -> str:
    return _PRESET_FIELDS[name]["note"]


def _config_from_fields(fields: dict) -> ExperimentConfig:
    plant = fields["plant"]
    return ExperimentConfig(
        params=Params(a=plant["a"], lam=plant["lam"], gamma=plant["gamma"], mu=plant["mu"]),
        sigma=make_sigma(**fields["sigma"]),
        z0=fields["z0"],
        w0=parse_profile(fields["w0"]),
        solver=fields.get("solver", "characteristics"),
        n=fields.get("n", 200),
        dt=fields.get("dt", 1e-3),
        h=fields.get("h", 0.01),
        t_end=fields.get("t_end", 10.0),
        output=fields.get("output"),
        snapshots=tuple(fields.get("snapshots", ())),
    )


def preset_config(name: str) -> ExperimentConfig:
    if name not in _PRESET_FIELDS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return _config_from_fields(_PRESET_FIELDS[name])


def _get(parser, section, key, cast, current):
    if parser.has_option(section, key):
        raw = parser.get(section, key)
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
    return current


def parse_config(path: str) -> ExperimentConfig:
    """Load an experiment config file, applying any preset base first."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")

    fields: dict = {
        "plant": dict(a=1.0, lam=1.0, gamma=1.0, mu=1.0),
        "sigma": dict(kind="arctan", theta=1.0, rho=1.0),
        "z0": 0.0,
        "w0": "0",
    }
    if parser.has_option("experiment", "preset"):
        name = parser.get("experiment", "preset")
        if name not in _PRESET_FIELDS:
            raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
        base = _PRESET_FIELDS[name]
        fields = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}

    plant = fields["plant"]
    plant["a"] = _get(parser, "plant", "a", float, plant["a"])
    plant["lam"] = _get(parser, "plant", "lambda", float, plant["lam"])
    plant["gamma"] = _get(parser, "plant", "gamma", float, plant["gamma"])
    plant["mu"] = _get(parser, "plant", "mu", float, plant["mu"])

    if parser.has_section("sigma"):
        sig = dict(kind=_get(parser, "sigma", "kind", str, fields["sigma"].get("kind", "arctan")))
        for key in ("rho", "theta", "s1", "s2"):
            if parser.has_option("sigma", key):
                sig[key] = parser.getfloat("sigma", key)
        fields["sigma"] = sig

    fields["z0"] = _get(parser, "initial", "z0", float, fields["z0"])
    fields["w0"] = _get(parser, "initial", "w0", str, fields["w0"])

    fields["solver"] = _get(parser, "solver", "method", str, fields.get("solver", "characteristics"))
    fields["n"] = _get(parser, "solver", "n", int, fields.get("n", 200))
    fields["dt"] = _get(parser, "solver", "dt", float, fields.get("dt", 1e-3))
    fields["h"] = _get(parser, "solver", "h", float, fields.get("h", 0.01))
    fields["t_end"] = _get(parser, "solver", "t_end", float, fields.get("t_end", 10.0))

    fields["output"] = _get(parser, "output", "path", str, fields.get("output"))
    if parser.has_option("output", "snapshots"):
        raw = parser.get("output", "snapshots")
        try:
            fields["snapshots"] = tuple(float(s) for s in raw.split(",") if s.strip())
        except ValueError as exc:
            raise ConfigError(f"bad snapshot list {raw!r}") from exc

    return _config_from_fields(fields)


def initial_compat_defect(config: ExperimentConfig) -> float:
    """|w0(0) - w0(1) - gamma z0| of the configured initial data."""
    w00 = float(config.w0(np.array(0.0)))
    w01 = float(config.w0(np.array(1.0)))
    return abs(w00 - w01 - config.params.gamma * config.z0)


def run(config: ExperimentConfig) -> tuple[Trajectory, RunSummary]:
    """Dispatch to the configured solver; write CSV when an output is set.

    Initial data violating the boundary relation is reported in the summary
    (mild-solution theory covers it), never rejected.
    """
    if config.solver == "characteristics":
        traj = characteristics.solve(
            config.z0,
            config.w0,
            config.params,
            config.sigma,
            characteristics.CharSolverConfig(dt=config.dt, n_render=config.n),
            config.t_end,
            snapshot_times=config.snapshots,
        )
    elif config.solver == "upwind":
        traj = upwind.solve(
            config.z0,
            config.w0,
            config.params,
            config.sigma,
            Grid(config.n),
            config.dt,
            config.t_end,
            snapshot_times=config.snapshots,
        )
    else:
        traj = generator.solve_implicit(
            config.z0,
            config.w0,
            config.params,
            config.sigma,
            Grid(config.n),
            config.h,
            config.t_end,
            snapshot_times=config.snapshots,
        )
    summary = summarize(traj, compat_defect=initial_compat_defect(config))
    if config.output:
        write_csv(traj, config.output)
    return traj, summary


@dataclasses.dataclass(frozen=True)
class CompareReport:
    """Pointwise deviations between two runs and, when the second config is
    a clean 2x refinement of the first, the observed convergence order."""

    max_dev_z: float
    rms_dev_z: float
    max_dev_v: float
    table: tuple[tuple[float, float, float], ...]
    order_z: float | None

    def lines(self) -> list[str]:
        out = [
            f"max |z_A - z_B|  = {self.max_dev_z:.6e}",
            f"rms |z_A - z_B|  = {self.rms_dev_z:.6e}",
            f"max |V_A - V_B|  = {self.max_dev_v:.6e}",
            "      t        |dz|          |dV|",
        ]
        for t, dz, dv in self.table:
            out.append(f"  {t:8.3f}  {dz:.4e}    {dv:.4e}")
        if self.order_z is not None:
            out.append(f"observed convergence order (z) = {self.order_z:.3f}")
        return out


def _same_problem(a: ExperimentConfig, b: ExperimentConfig) -> bool:
    return (
        a.params == b.params
        and a.sigma == b.sigma
        and a.z0 == b.z0
        and a.w0.expr == b.w0.expr
        and a.t_end == b.t_end
    )


def _refine_once(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.solver == "characteristics":
        return cfg.replace(dt=cfg.dt / 2.0)
    if cfg.solver == "upwind":
        return cfg.replace(n=2 * cfg.n, dt=cfg.dt / 2.0)
    return cfg.replace(h=cfg.h / 2.0)


def _is_refinement(a: ExperimentConfig, b: ExperimentConfig) -> bool:
    if a.solver != b.solver:
        return False
    r = _refine_once(a)
    return (
        math.isclose(r.dt, b.dt, rel_tol=1e-9)
        and r.n == b.n
        and math.isclose(r.h, b.h, rel_tol=1e-9)
    )


def _deviations(ta: Trajectory, tb: Trajectory, n_table: int = 8):
    t_hi = min(ta.t[-1], tb.t[-1])
    base = ta.t[ta.t <= t_hi + 1e-12]
    zb = np.interp(base, tb.t, tb.z)
    vb = np.interp(base, tb.t, tb.v)
    dz = np.abs(ta.z[: base.size] - zb)
    dv = np.abs(ta.v[: base.size] - vb)
    picks = np.unique(np.linspace(0, base.size - 1, n_table).astype(int))
    table = tuple((float(base[i]), float(dz[i]), float(dv[i])) for i in picks)
    return float(dz.max()), float(np.sqrt(np.mean(dz**2))), float(dv.max()), table


def compare(config_a: ExperimentConfig, config_b: ExperimentConfig) -> CompareReport:
    """Run both configs on the same problem and tabulate their deviation.

    When config_b is config_a refined once (halved dt, doubled n, or halved
    h), a third, twice-refined run is added and the usual two-deviation
    estimate log2(d(A,B)/d(B,C)) of the convergence order is reported.
    """
    if not _same_problem(config_a, config_b):
        raise ConfigError(
            "configs are not comparable: plant, sigma, initial data and t_end must agree"
        )
    ta, _ = run(config_a.replace(output=None, snapshots=()))
    tb, _ = run(config_b.replace(output=None, snapshots=()))
    max_z, rms_z, max_v, table = _deviations(ta, tb)

    order = None
    if _is_refinement(config_a, config_b) and max_z > 0:
        tc, _ = run(_refine_once(config_b).replace(output=None, snapshots=()))
        d_bc, _, _, _ = _deviations(tb, tc)
        if d_bc > 0:
            order = float(np.log2(max_z / d_bc))
    return CompareReport(max_z, rms_z, max_v, table, order)


def zero_inflow_energies(
    lam: float, w0, n: int, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Energies of the zero-inflow transport w_t + lam w_x = 0, w(t,0) = 0.

    The solution is the initial profile slid right and truncated: exact
    rendering, trapezoid energies.  The profile must vanish outside its
    support inside (0, 1).
    """
    profile = as_profile(w0)
    grid = Grid(n)
    q = Quadrature(grid)
    e1 = np.empty(times.size)
    e2 = np.empty(times.size)
    for i, t in enumerate(times):
        xi = grid.nodes - lam * t
        inside = (xi >= 0.0) & (xi <= 1.0)
        w = np.where(inside, profile(np.clip(xi, 0.0, 1.0)), 0.0)
        sq = w * w
        e1[i] = float(q.weights @ sq)
        e2[i] = float(q.weights @ (q.exp_weights * sq))
    return e1, e2


@dataclasses.dataclass(frozen=True)
class LasalleReport:
    """Tail behavior of a closed-loop run plus the limit-system energy laws."""

    tail_z: tuple[tuple[float, float], ...]
    tail_u: tuple[tuple[float, float], ...]
    tail_wm: tuple[tuple[float, float], ...]
    e1_rel_drift_before_exit: float
    e1_after_clearing: float
    e2_overshoot: float
    e1_emptied: bool

    def lines(self) -> list[str]:
        out = ["closed-loop tail suprema (from T to end):"]
        for (t0, sz), (_, su), (_, sm) in zip(self.tail_z, self.tail_u, self.tail_wm):
            out.append(
                f"  T = {t0:8.3f}:  |z| <= {sz:.3e}   |u| <= {su:.3e}   |<w,M>| <= {sm:.3e}"
            )
        out += [
            "zero-inflow limit system (compact bump initial data):",
            f"  E1 relative drift while supported inside: {self.e1_rel_drift_before_exit:.3e}",
            f"  E1 after the support clears the domain:   {self.e1_after_clearing:.3e}",
            f"  max E2(t) - exp(-lam t) E2(0) overshoot:  {self.e2_overshoot:.3e}",
            f"  flat energy emptied (not preserved):      {self.e1_emptied}",
        ]
        return out


def lasalle_check(config: ExperimentConfig, n_tail: int = 4) -> LasalleReport:
    """Two diagnostics behind the convergence claim.

    (i) on the configured closed-loop run: tail suprema of |z|, |u| and of
    the gain-weighted average <w, M> = u/mu + z ||M||^2, which must all sink.
    (ii) the limit dynamics with both boundary values pinned to zero: the
    flat energy is constant only until the profile reaches the outflow and
    is gone after one transit, while the weighted energy obeys
    E2(t) <= exp(-lam t) E2(0); together they rule out nonzero limits.
    """
    traj, _ = run(config.replace(output=None))
    grid = Grid(config.n)
    q = Quadrature(grid)
    gain = build_gain(config.params, grid)
    mn2 = q.inner(gain.samples, gain.samples)
    wm = traj.u / config.params.mu + traj.z * mn2

    t0, t1 = traj.t[0], traj.t[-1]
    tail_z, tail_u, tail_wm = [], [], []
    for k in range(n_tail):
        lo = t0 + (t1 - t0) * k / n_tail
        mask = traj.t >= lo
        tail_z.append((float(lo), float(np.max(np.abs(traj.z[mask])))))
        tail_u.append((float(lo), float(np.max(np.abs(traj.u[mask])))))
        tail_wm.append((float(lo), float(np.max(np.abs(wm[mask])))))

    lam = config.params.lam
    times = np.linspace(0.0, 2.0 / lam, 201)
    e1, e2 = zero_inflow_energies(lam, "bump(0.3,0.1)", n=1000, times=times)
    before = times <= 0.6 / lam + 1e-12
    after = times >= 1.0 / lam - 1e-12
    drift = float(np.max(np.abs(e1[before] - e1[0])) / e1[0])
    cleared = float(np.max(e1[after]))
    bound = np.exp(-lam * times) * e2[0]
    overshoot = float(np.max(e2 - bound))
    return LasalleReport(
        tail_z=tuple(tail_z),
        tail_u=tuple(tail_u),
        tail_wm=tuple(tail_wm),
        e1_rel_drift_before_exit=drift,
        e1_after_clearing=cleared,
        e2_overshoot=overshoot,
        e1_emptied=bool(e1[-1] < 1e-10 * e1[0] if e1[0] > 0 else True),
    )
