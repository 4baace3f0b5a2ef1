"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criterion 2's relative-decay clause for the field energy is expected to fail:
the exact dynamics of the benchmark configuration decay at rate ~0.048 (the
slowest closed-loop mode is -0.0241 +/- 6.28i), so ||w||^2 reaches 1e-3 of
its initial value only near t ~ 128, after the t = 100 horizon the clause
demands.  The assertion is kept as stated; see the test for the measured
numbers.
"""

import math
import time

import numpy as np
import pytest

from transport_forwarding import (
    Arctan,
    CharSolverConfig,
    Grid,
    Linear,
    Params,
    Quadrature,
    ResolventProblem,
    Saturation,
    apply_generator,
    build_gain,
    dissipativity_gap,
    gain_residual,
    implicit_step,
    random_compatible_state,
    random_fundamental_state,
    resolvent_solve,
    solve_characteristics,
    solve_implicit,
    solve_upwind,
    x_inner,
    zero_inflow_energies,
)

BENCH = Params(a=1.0, lam=1.0, gamma=1.0, mu=1.0)
SIGMA = Arctan(theta=1.0, rho=1.0)
W0 = "sin(1) - poly(1)"
CATALOG = (Linear(1.0), Saturation(1.0, -1.0, 1.0), Arctan(1.0, 1.0))


def _report(criterion, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")


@pytest.fixture(scope="module")
def benchmark():
    """Reference run: characteristics solver, dt = 1e-3, t in [0, 100]."""
    t0 = time.perf_counter()
    traj = solve_characteristics(
        1.0, W0, BENCH, SIGMA, CharSolverConfig(dt=1e-3, n_render=200), 100.0
    )
    return traj, time.perf_counter() - t0


def _norm_x(z, w, gain, params, sigma, q):
    return math.sqrt(x_inner(z, w, z, w, gain, params, sigma, q))


def test_criterion_1_benchmark_decay(benchmark):
    traj, elapsed = benchmark
    dv_max = float(np.max(np.diff(traj.v)))
    ratio = traj.v[-1] / traj.v[0]
    ok = (
        dv_max <= 1e-6 * traj.v[0]
        and ratio <= 0.05
        and 2.40e-3 <= ratio <= 2.50e-3  # frozen from the verified reference run
        and elapsed < 30.0
    )
    _report(
        1,
        ok,
        f"V monotone (max step dV {dv_max:.2e} vs {1e-6 * traj.v[0]:.2e}), "
        f"V(100)/V(0) = {ratio:.4e} <= 0.05, runtime {elapsed:.1f}s < 30s",
    )
    assert dv_max <= 1e-6 * traj.v[0]
    assert ratio <= 0.05
    assert 2.40e-3 <= ratio <= 2.50e-3
    assert elapsed < 30.0


def test_criterion_2_ordering(benchmark):
    traj, _ = benchmark
    iz = np.nonzero(traj.z_sq < 1e-4)[0]
    iw = np.nonzero(traj.w_l2_sq < 1e-4)[0]
    assert iz.size > 0, "z^2 never fell below 1e-4"
    t_z = float(traj.t[iz[0]])
    t_w = float(traj.t[iw[0]]) if iw.size else math.inf
    ok = t_z < t_w
    _report(
        "2 (ordering)",
        ok,
        f"z^2 < 1e-4 at t = {t_z:.3f}, ||w||^2 < 1e-4 at t = "
        + (f"{t_w:.3f}" if math.isfinite(t_w) else "never (within horizon)"),
    )
    assert ok


def test_criterion_2_relative_decay(benchmark):
    traj, _ = benchmark
    z_ratio = traj.z_sq[-1] / traj.z_sq[0]
    w_ratio = traj.w_l2_sq[-1] / traj.w_l2_sq[0]
    ok = z_ratio < 1e-3 and w_ratio < 1e-3
    _report(
        "2 (relative decay by t=100)",
        ok,
        f"z^2(100)/z^2(0) = {z_ratio:.3e}, ||w||^2(100)/||w||^2(0) = {w_ratio:.3e} "
        f"(both required < 1e-3)",
    )
    assert z_ratio < 1e-3
    # Expected failure: the exact dynamics decay at rate ~0.048 (slowest
    # closed-loop mode -0.0241 +/- 6.28i, confirmed against the linearized
    # spectrum and two independent solvers), so the field energy reaches
    # 1e-3 of its initial value only at t ~ 128 > 100.  The threshold is
    # kept as specified rather than weakened to fit.
    assert w_ratio < 1e-3, (
        f"field energy ratio {w_ratio:.3e} at t=100 cannot meet 1e-3: the exact "
        "closed loop decays at rate ~0.048, crossing only near t~128"
    )


def test_criterion_3_gain_correctness():
    rng = np.random.default_rng(321)
    grid = Grid(128)
    worst = 0.0
    for _ in range(20):
        p = Params(
            a=rng.uniform(0.1, 4.0),
            lam=rng.uniform(0.2, 3.0),
            gamma=float(rng.choice([-1.0, 1.0])) * rng.uniform(0.2, 3.0),
            mu=rng.uniform(0.1, 3.0),
        )
        gain = build_gain(p, grid)
        worst = max(worst, abs(gain.samples[0] - gain.samples[-1] - p.gamma))
    res = {n: gain_residual(build_gain(BENCH, Grid(n))) for n in (64, 128, 256)}
    o1 = math.log2(res[64] / res[128])
    o2 = math.log2(res[128] / res[256])
    ok = worst <= 1e-12 and 1.8 <= o1 <= 2.2 and 1.8 <= o2 <= 2.2
    _report(3, ok, f"boundary identity defect {worst:.2e}, residual orders {o1:.3f}, {o2:.3f}")
    assert worst <= 1e-12
    assert 1.8 <= o1 <= 2.2 and 1.8 <= o2 <= 2.2


def test_criterion_4_dissipativity_sweep():
    t0 = time.perf_counter()
    grid = Grid(200)
    q = Quadrature(grid)
    gain = build_gain(BENCH, grid)
    rng = np.random.default_rng(11)
    worst_rel = -math.inf
    for sigma in CATALOG:
        for _ in range(167):
            s1 = random_compatible_state(rng, grid, BENCH.gamma)
            s2 = random_compatible_state(rng, grid, BENCH.gamma)
            gap = dissipativity_gap(s1, s2, gain, BENCH, sigma, q)
            dist = x_inner(
                s1.z - s2.z, s1.w - s2.w, s1.z - s2.z, s1.w - s2.w, gain, BENCH, sigma, q
            )
            worst_rel = max(worst_rel, gap / dist)
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-3 and elapsed < 10.0
    _report(4, ok, f"worst gap/dist = {worst_rel:.3e} over 501 pairs x 3 entries, {elapsed:.1f}s")
    assert worst_rel <= 1e-3
    # frozen regression: every measured gap was strictly negative
    assert worst_rel <= 0.0
    assert elapsed < 10.0


def test_criterion_5_resolvent_identity():
    grid = Grid(200)
    q = Quadrature(grid)
    gain = build_gain(BENCH, grid)
    rng = np.random.default_rng(20240613)
    worst = 0.0
    for i in range(100):
        rhs = random_fundamental_state(rng, grid)
        sigma = CATALOG[i % 3]
        for h in (0.1, 1.0):
            out = resolvent_solve(
                ResolventProblem(rhs=rhs, h=h, params=BENCH, gain=gain, sigma=sigma)
            )
            (fz, fw), _ = apply_generator(out, gain, BENCH, sigma, q)
            rz = out.z - h * fz - rhs.z
            rw = out.w - h * fw - rhs.w
            res = _norm_x(rz, rw, gain, BENCH, sigma, q)
            scale = _norm_x(rhs.z, rhs.w, gain, BENCH, sigma, q)
            worst = max(worst, res / (grid.dx**2 * scale))

    # linear nonlinearity: bisection output vs the affine closed form
    rho = 0.7
    lin = Linear(rho)
    worst_lin = 0.0
    for h in (0.1, 1.0):
        for _ in range(10):
            rhs = random_fundamental_state(rng, grid)
            out = resolvent_solve(
                ResolventProblem(rhs=rhs, h=h, params=BENCH, gain=gain, sigma=lin)
            )
            hl = h * BENCH.lam
            d = grid.dx / hl
            beta = math.exp(-d)
            wa = (1.0 - beta * (1.0 + d)) / d**2
            wb = (d - 1.0 + beta) / d**2
            pref = np.zeros(grid.n + 1)
            for k in range(1, grid.n + 1):
                pref[k] = beta * pref[k - 1] + grid.dx * (wa * rhs.w[k - 1] + wb * rhs.w[k])
            one_e = -math.expm1(-1.0 / hl)
            alpha = np.exp(-grid.nodes / hl)
            g_field = (pref + alpha / one_e * pref[-1]) / hl
            c_coef = BENCH.mu * (
                BENCH.gamma / one_e * q.inner(alpha, gain.samples)
                - q.inner(gain.samples, gain.samples)
            )
            gm = q.inner(g_field, gain.samples)
            z_oracle = (rhs.z + h * rho * BENCH.mu * gm) / (1.0 + h * BENCH.a - h * rho * c_coef)
            worst_lin = max(worst_lin, abs(out.z - z_oracle))

    ok = worst <= 5.0 and worst_lin <= 1e-10
    _report(
        5,
        ok,
        f"worst residual / (dx^2 ||rhs||) = {worst:.3f} <= 5; "
        f"linear-solve agreement {worst_lin:.2e} <= 1e-10",
    )
    assert worst <= 5.0
    assert worst_lin <= 1e-10


def test_criterion_6_contraction():
    grid = Grid(200)
    q = Quadrature(grid)
    gain = build_gain(BENCH, grid)
    rng = np.random.default_rng(77)
    worst = 0.0
    for h in (0.1, 1.0):
        for _ in range(50):
            s1 = random_compatible_state(rng, grid, BENCH.gamma)
            s2 = random_compatible_state(rng, grid, BENCH.gamma)
            o1 = implicit_step(s1, h, gain, BENCH, SIGMA)
            o2 = implicit_step(s2, h, gain, BENCH, SIGMA)
            before = x_inner(
                s1.z - s2.z, s1.w - s2.w, s1.z - s2.z, s1.w - s2.w, gain, BENCH, SIGMA, q
            )
            after = x_inner(
                o1.z - o2.z, o1.w - o2.w, o1.z - o2.z, o1.w - o2.w, gain, BENCH, SIGMA, q
            )
            worst = max(worst, math.sqrt(after / before))
    ok = worst <= 1.0 + 1e-6
    _report(6, ok, f"max distance ratio over 100 pairs = {worst:.6f} <= 1 + 1e-6")
    assert worst <= 1.0 + 1e-6


def test_criterion_7_cross_solver_convergence(benchmark):
    traj, _ = benchmark
    mask = traj.t <= 10.0 + 1e-12
    t_ref, z_ref = traj.t[mask], traj.z[mask]

    up_err = {}
    for n in (400, 800, 1600):
        tr = solve_upwind(1.0, W0, BENCH, SIGMA, Grid(n), 0.5 / n, 10.0)
        zi = np.interp(tr.t, t_ref, z_ref)
        up_err[n] = float(np.abs(tr.z - zi).max())
    up_orders = [
        math.log2(up_err[400] / up_err[800]),
        math.log2(up_err[800] / up_err[1600]),
    ]

    im_err = {}
    for h in (2.5e-3, 1.25e-3, 6.25e-4):
        tr = solve_implicit(1.0, W0, BENCH, SIGMA, Grid(4000), h, 10.0)
        zi = np.interp(tr.t, t_ref, z_ref)
        im_err[h] = float(np.abs(tr.z - zi).max())
    im_orders = [
        math.log2(im_err[2.5e-3] / im_err[1.25e-3]),
        math.log2(im_err[1.25e-3] / im_err[6.25e-4]),
    ]

    ok = all(0.8 <= o <= 1.3 for o in up_orders + im_orders)
    _report(
        7,
        ok,
        f"upwind orders {up_orders[0]:.3f}, {up_orders[1]:.3f}; "
        f"implicit orders {im_orders[0]:.3f}, {im_orders[1]:.3f} (window [0.8, 1.3])",
    )
    for o in up_orders + im_orders:
        assert 0.8 <= o <= 1.3


def test_criterion_8_limit_system_energy_laws():
    lam = 1.0
    times = np.linspace(0.0, 2.0, 401)
    e1, e2 = zero_inflow_energies(lam, "bump(0.3,0.1)", n=1000, times=times)
    drift = float(np.max(np.abs(e1[times <= 0.6] - e1[0])) / e1[0])
    cleared = float(np.max(e1[times >= 1.0]))
    bound_ok = bool(np.all(e2 <= np.exp(-lam * times) * e2[0] * (1.0 + 1e-6)))
    ok = drift <= 1e-6 and cleared <= 1e-10 and bound_ok
    _report(
        8,
        ok,
        f"E1 drift (t<=0.6) = {drift:.2e} <= 1e-6, E1 (t>=1) = {cleared:.2e} <= 1e-10, "
        f"E2 <= exp(-lam t) E2(0): {bound_ok}",
    )
    assert drift <= 1e-6
    assert cleared <= 1e-10
    assert bound_ok


def test_criterion_9_tail_diagnostics(benchmark):
    traj, _ = benchmark
    grid = Grid(200)
    q = Quadrature(grid)
    gain = build_gain(BENCH, grid)
    mn2 = q.inner(gain.samples, gain.samples)
    mask = traj.t >= 50.0
    sup_u = float(np.max(np.abs(traj.u[mask])))
    wm = traj.u / BENCH.mu + traj.z * mn2
    sup_wm = float(np.max(np.abs(wm[mask])))
    # frozen from the verified reference run (0.04864 and 0.05063) + 5%
    ok = sup_u <= 0.0511 and sup_wm <= 0.0532
    _report(
        9,
        ok,
        f"sup |u| over [50,100] = {sup_u:.5f} <= 0.0511; "
        f"sup |<w,M>| = {sup_wm:.5f} <= 0.0532",
    )
    assert sup_u <= 0.0511
    assert sup_wm <= 0.0532
