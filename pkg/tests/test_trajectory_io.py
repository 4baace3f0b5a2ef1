import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from transport_forwarding import Snapshot, Trajectory, read_csv, summarize, write_csv
from transport_forwarding.trajectory import resolve_output_path, snapshot_filename


def _traj(values, t=None):
    n = len(values)
    t = np.arange(n, dtype=float) if t is None else t
    cols = [np.asarray(values, dtype=float) for _ in range(7)]
    return Trajectory(t, *cols)


class TestValidation:
    def test_rejects_decreasing_time(self):
        with pytest.raises(ValueError):
            _traj([0.0, 1.0], t=np.array([1.0, 0.0]))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            _traj([0.0, float("nan")])

    def test_rejects_ragged(self):
        with pytest.raises(ValueError):
            Trajectory(
                np.array([0.0, 1.0]),
                *[np.zeros(2) for _ in range(6)],
                np.zeros(3),
            )


class TestCsv:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        vals = rng.normal(size=37) * 10.0 ** rng.integers(-12, 12, size=37)
        traj = _traj(vals)
        path = write_csv(traj, tmp_path / "run.csv")
        back = read_csv(path)
        for a, b in zip(traj.columns(), back.columns()):
            assert np.array_equal(a, b)

    @given(
        vals=arrays(
            np.float64,
            st.integers(2, 30),
            elements=st.floats(
                allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300
            ),
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_round_trip_property(self, tmp_path_factory, vals):
        traj = _traj(vals)
        path = write_csv(traj, tmp_path_factory.mktemp("csv") / "t.csv")
        back = read_csv(path)
        assert np.array_equal(traj.z, back.z)

    def test_header_checked(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_csv(p)

    def test_snapshots_written(self, tmp_path):
        traj = _traj([0.0, 1.0])
        traj.snapshots.append(Snapshot(0.5, np.array([0.0, 1.0]), np.array([2.0, 3.0])))
        write_csv(traj, tmp_path / "run.csv")
        snap = tmp_path / snapshot_filename(0.5)
        assert snap.exists()
        lines = snap.read_text().splitlines()
        assert lines[0] == "x,w"
        assert len(lines) == 3

    def test_output_dir_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TFWD_OUT_DIR", str(tmp_path / "redirected"))
        assert resolve_output_path("run.csv") == tmp_path / "redirected" / "run.csv"
        out = write_csv(_traj([0.0, 1.0]), "run.csv")
        assert out.exists() and out.parent == tmp_path / "redirected"
        monkeypatch.delenv("TFWD_OUT_DIR")
        assert resolve_output_path("run.csv") == __import__("pathlib").Path("run.csv")

    def test_absolute_path_not_redirected(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TFWD_OUT_DIR", str(tmp_path / "elsewhere"))
        target = tmp_path / "direct.csv"
        assert resolve_output_path(target) == target


class TestSummary:
    def test_fields(self):
        t = np.linspace(0.0, 1.0, 101)
        z = np.exp(-10.0 * t)
        cols = [z, z, z**2, z**2, z**2, z**2, z**2]
        traj = Trajectory(t, *cols)
        s = summarize(traj, compat_defect=1e-16)
        assert s.v_initial == 1.0
        assert s.t_z_small is not None and s.t_z_small <= 1.0
        assert s.dv_max <= 0.0
        assert len(s.u_tail_sup) == 4
        assert any("V(0)" in line for line in s.lines())

    def test_never_small(self):
        t = np.linspace(0.0, 1.0, 11)
        ones = np.ones(11)
        traj = Trajectory(t, *[ones for _ in range(7)])
        s = summarize(traj)
        assert s.t_z_small is None
