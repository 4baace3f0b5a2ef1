#!/usr/bin/env python3
"""Exploratory sweep: settling of z versus the feedback gain mu.

For mu in {0.5, 1, 2} on the benchmark initial data, report the first time
|z| stays below 1e-3 and the field energy left at the horizon.  There is no
rate claim to assert; the table is informational.
"""

import dataclasses
import sys

from transport_forwarding import harness


def main() -> int:
    t_end = 30.0
    print(f"benchmark initial data, characteristics solver, horizon {t_end:g}")
    print("   mu   first |z|<1e-3      V(end)/V(0)    ||w||^2(end)")
    for mu in (0.5, 1.0, 2.0):
        cfg = harness.preset_config("paper-fig")
        cfg = cfg.replace(params=dataclasses.replace(cfg.params, mu=mu), t_end=t_end)
        traj, summary = harness.run(cfg)
        t_cross = summary.t_z_small
        print(
            f"  {mu:4.1f}   {t_cross if t_cross is not None else float('nan'):12.3f}"
            f"      {traj.v[-1] / traj.v[0]:.4e}     {traj.w_l2_sq[-1]:.4e}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
