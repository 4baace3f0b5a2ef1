"""Standalone property checks behind the ``selftest`` CLI subcommand.

A trimmed, seeded version of the pytest suite that needs no test
dependencies: each check prints one PASS/FAIL line and the runner reports
whether any property was violated.
"""

from __future__ import annotations

import math

import numpy as np

from .characteristics import CharSolverConfig, solve as solve_char
from .generator import ResolventProblem, apply_generator, dissipativity_gap, implicit_step, resolvent_solve
from .harness import preset_config, run, zero_inflow_energies
from .model import (
    Arctan,
    Grid,
    Linear,
    Params,
    Saturation,
    build_gain,
    gain_residual,
    random_compatible_state,
    random_fundamental_state,
)
from .spaces import Quadrature, state_norm_sq, x_inner
from .trajectory import read_csv

__all__ = ["run_selftest"]

_SIGMAS = (Linear(rho=1.0), Saturation(rho=1.0, s1=-1.0, s2=1.0), Arctan(theta=1.0, rho=1.0))


def _check_gain(rng):
    for _ in range(20):
        params = Params(
            a=rng.uniform(0.1, 4.0),
            lam=rng.uniform(0.2, 3.0),
            gamma=rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 3.0),
            mu=rng.uniform(0.1, 3.0),
        )
        gain = build_gain(params, Grid(128))
        if abs(gain.samples[0] - gain.samples[-1] - params.gamma) > 1e-12:
            return f"gain boundary identity broken for {params}"
        if np.any(params.gamma * gain.samples >= 0):
            return f"gain sign condition broken for {params}"
    params = Params(a=1.0, lam=1.0, gamma=1.0, mu=1.0)
    r64 = gain_residual(build_gain(params, Grid(64)))
    r128 = gain_residual(build_gain(params, Grid(128)))
    if not (3.4 <= r64 / r128 <= 4.6):
        return f"gain residual not second order: ratio {r64 / r128:.3f}"
    return None


def _check_sigma(rng):
    for sigma in _SIGMAS:
        s = rng.uniform(-20, 20, size=(200, 2))
        d_sig = sigma(s[:, 0]) - sigma(s[:, 1])
        d_s = s[:, 0] - s[:, 1]
        if float(sigma(0.0)) != 0.0:
            return f"{sigma} does not vanish at 0"
        if np.any(d_sig * d_s < 0):
            return f"{sigma} is not nondecreasing"
        if np.any(np.abs(d_sig) > sigma.m * np.abs(d_s) * (1 + 1e-12)):
            return f"{sigma} violates its Lipschitz constant"
    return None


def _check_quadrature(rng):
    q = Quadrature(Grid(256))
    if abs(q.integrate(np.ones(257)) - 1.0) > 1e-14:
        return "trapezoid does not integrate constants exactly"
    s = np.sin(2 * np.pi * q.grid.nodes)
    if abs(q.inner(s, s) - 0.5) > 1e-3:
        return "trapezoid value of int sin^2 is off"
    return None


def _check_dissipativity(rng):
    params = Params(a=1.0, lam=1.0, gamma=1.0, mu=1.0)
    grid = Grid(200)
    q = Quadrature(grid)
    gain = build_gain(params, grid)
    for sigma in _SIGMAS:
        for _ in range(20):
            s1 = random_compatible_state(rng, grid, params.gamma)
            s2 = random_compatible_state(rng, grid, params.gamma)
            gap = dissipativity_gap(s1, s2, gain, params, sigma, q)
            dist = x_inner(
                s1.z - s2.z, s1.w - s2.w, s1.z - s2.z, s1.w - s2.w,
                gain, params, sigma, q,
            )
            if gap > 1e-3 * dist:
                return f"dissipativity gap {gap:.3e} above 1e-3 * {dist:.3e}"
    return None


def _check_resolvent(rng):
    params = Params(a=1.0, lam=1.0, gamma=1.0, mu=1.0)
    grid = Grid(200)
    q = Quadrature(grid)
    gain = build_gain(params, grid)
    for sigma in _SIGMAS:
        for h in (0.1, 1.0):
            for _ in range(5):
                rhs = random_fundamental_state(rng, grid)
                out = resolvent_solve(
                    ResolventProblem(rhs=rhs, h=h, params=params, gain=gain, sigma=sigma)
                )
                (fz, fw), _ = apply_generator(out, gain, params, sigma, q)
                rz = out.z - h * fz - rhs.z
                rw = out.w - h * fw - rhs.w
                res = math.sqrt(x_inner(rz, rw, rz, rw, gain, params, sigma, q))
                scale = math.sqrt(state_norm_sq(rhs, gain, params, sigma, q))
                if res > 5.0 * grid.dx**2 * scale:
                    return f"resolvent residual {res:.3e} above 5 dx^2 * {scale:.3e}"
    return None


def _check_contraction(rng):
    params = Params(a=1.0, lam=1.0, gamma=1.0, mu=1.0)
    grid = Grid(200)
    q = Quadrature(grid)
    gain = build_gain(params, grid)
    sigma = Arctan(theta=1.0, rho=1.0)
    for _ in range(20):
        s1 = random_compatible_state(rng, grid, params.gamma)
        s2 = random_compatible_state(rng, grid, params.gamma)
        o1 = implicit_step(s1, 0.1, gain, params, sigma)
        o2 = implicit_step(s2, 0.1, gain, params, sigma)
        before = x_inner(s1.z - s2.z, s1.w - s2.w, s1.z - s2.z, s1.w - s2.w, gain, params, sigma, q)
        after = x_inner(o1.z - o2.z, o1.w - o2.w, o1.z - o2.z, o1.w - o2.w, gain, params, sigma, q)
        if after > before * (1 + 1e-6):
            return f"implicit step expanded a pair: {after:.6e} > {before:.6e}"
    return None


def _check_zero_inflow(rng):
    times = np.linspace(0.0, 2.0, 101)
    e1, e2 = zero_inflow_energies(1.0, "bump(0.3,0.1)", n=1000, times=times)
    if np.max(np.abs(e1[times <= 0.6] - e1[0])) > 1e-6 * e1[0]:
        return "flat energy drifts before the support reaches the outflow"
    if np.max(e1[times >= 1.0]) > 1e-10:
        return "flat energy fails to empty after one transit"
    if np.max(e2 - np.exp(-times) * e2[0]) > 1e-6 * e2[0]:
        return "weighted energy exceeds its exponential bound"
    return None


def _check_conservation(rng):
    params = Params(a=1.0, lam=1.0, gamma=0.0, mu=1.0)
    traj = solve_char(
        0.0, "sin(1)", params, Arctan(theta=1.0, rho=1.0),
        CharSolverConfig(dt=1e-3, n_render=200), 1.0,
    )
    if np.max(np.abs(traj.e1 - traj.e1[0])) > 1e-10:
        return "decoupled advection does not conserve the flat energy"
    return None


def _check_cross_solver(rng):
    cfg = preset_config("paper-fig").replace(t_end=1.0)
    traj_c, _ = run(cfg)
    traj_u, _ = run(cfg.replace(solver="upwind", n=400, dt=1.0 / 800.0))
    zc = np.interp(traj_u.t, traj_c.t, traj_c.z)
    if np.max(np.abs(zc - traj_u.z)) > 0.05:
        return "upwind and characteristics disagree beyond first-order tolerance"
    return None


def _check_csv(rng, tmpdir):
    from .harness import preset_config

    cfg = preset_config("zero").replace(t_end=0.01, output=str(tmpdir / "zero.csv"))
    traj, _ = run(cfg)
    back = read_csv(tmpdir / "zero.csv")
    for a, b in zip(traj.columns(), back.columns()):
        if not np.array_equal(a, b):
            return "CSV round-trip is not bit exact"
    return None


def run_selftest(stream=None) -> bool:
    """Run every check; print one line each; True iff all passed."""
    import sys
    import tempfile
    from pathlib import Path

    stream = stream or sys.stdout
    checks = [
        ("gain profile identities and residual order", _check_gain),
        ("nonlinearity catalog monotone and Lipschitz", _check_sigma),
        ("trapezoid quadrature sanity", _check_quadrature),
        ("dissipativity gap sweep", _check_dissipativity),
        ("resolvent identity and residual bound", _check_resolvent),
        ("implicit step contraction", _check_contraction),
        ("zero-inflow limit-system energy laws", _check_zero_inflow),
        ("decoupled advection conservation", _check_conservation),
        ("cross-solver agreement", _check_cross_solver),
    ]
    ok = True
    rng = np.random.default_rng(20240613)
    for name, fn in checks:
        msg = fn(rng)
        status = "PASS" if msg is None else "FAIL"
        ok &= msg is None
        print(f"[{status}] {name}" + (f": {msg}" if msg else ""), file=stream)
    with tempfile.TemporaryDirectory() as td:
        msg = _check_csv(rng, Path(td))
        print(f"[{'PASS' if msg is None else 'FAIL'}] CSV round-trip" + (f": {msg}" if msg else ""), file=stream)
        ok &= msg is None
    return ok
