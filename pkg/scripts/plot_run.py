#!/usr/bin/env python3
"""Plot V, z^2 and ||w||^2 from a run CSV (written by `tfwd run`)."""

import sys
from pathlib import Path

from transport_forwarding import read_csv


def main() -> int:
    if len(sys.argv) < 2:
        print("usage: plot_run.py <run.csv> [out.png]", file=sys.stderr)
        return 1
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is not installed (pip install -e .[plots])", file=sys.stderr)
        return 1

    traj = read_csv(sys.argv[1])
    out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path(sys.argv[1]).with_suffix(".png")

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(traj.t, traj.v)
    ax1.set_xlabel("t")
    ax1.set_ylabel("V(t)")
    ax1.set_title("weighted energy")
    ax2.semilogy(traj.t, traj.z_sq, label="z^2")
    ax2.semilogy(traj.t, traj.w_l2_sq, label="||w||^2")
    ax2.set_xlabel("t")
    ax2.legend()
    ax2.set_title("state energies")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
