import math

import numpy as np
import pytest

import nswlab


def test_cover_counts():
    assert len(nswlab.build_cover(1)) == 120
    assert len(nswlab.build_cover(3, refine=2)) == 113
    report = nswlab.verify_cover(3)
    assert report["partition_ok"] and report["shell_counts_ok"]
    assert report["adjacent_volume_ratio_max"] == 8


def test_field_round_trip(tmp_path):
    data = np.random.default_rng(0).standard_normal((3, 8, 8, 8))
    f = nswlab.GridField(data, 2.0, time=0.5)
    assert f.N == 8 and f.ncomp == 3 and f.time == 0.5
    np.testing.assert_array_equal(f.to_numpy(), data)
    path = str(tmp_path / "f.nswf")
    nswlab.save_nswf(path, f)
    np.testing.assert_array_equal(nswlab.load_nswf(path).to_numpy(), data)


def test_zero_field_norms():
    f = nswlab.GridField(np.zeros((3, 16, 16, 16)), 8.0)
    assert nswlab.m_norm(f, 2) == 0.0
    assert nswlab.cn_norm(f, 2, 1) == 0.0


def test_generated_field_is_solenoidal():
    u = nswlab.generate("gaussian_vortex", 4.0, 32, amplitude=0.5, seed=2)
    assert nswlab.divergence_max(u) < 1e-10
    rep = nswlab.equivalence_report(u, nswlab.largest_cover_level(u))
    assert rep["m_norm"] > 0


def test_shear_pressure():
    n, L = 32, math.pi
    x = (np.arange(n) + 0.5) * 2 * L / n - L
    X, Y, _ = np.meshgrid(x, x, x, indexing="ij")
    u = np.stack([np.cos(Y), np.cos(X), np.zeros_like(X)])
    p = nswlab.global_pressure(nswlab.GridField(u, L)).to_numpy()[0]
    np.testing.assert_allclose(p, np.sin(X) * np.sin(Y), atol=1e-10)


def test_heat_mode_decay():
    n, L = 16, math.pi
    x = (np.arange(n) + 0.5) * 2 * L / n - L
    _, _, Z = np.meshgrid(x, x, x, indexing="ij")
    u = np.zeros((3, n, n, n))
    u[0] = np.sin(2 * Z)
    us, ps, log = nswlab.solve(nswlab.GridField(u, L, 0.0), 0.1, 0.5, mode="stokes_heat")
    assert len(us) == 6 and len(log) == 6
    np.testing.assert_allclose(us[-1].to_numpy()[0], math.exp(-4 * 0.5) * np.sin(2 * Z), atol=1e-10)


def test_time_scales_and_region():
    assert nswlab.gronwall_time(1.0, 0.0, 1.0, 2.0) == pytest.approx(0.25)
    assert nswlab.sigma_sq(1.0) == 0.8
    r = nswlab.eventual_region(0.5, 1.0, 3)
    assert r["abut"] and r["nested"] and r["coverage"] == 1.0


def test_errors_and_cli(tmp_path):
    with pytest.raises(nswlab.NswError):
        nswlab.sigma_sq(2.0)
    code, out, _ = nswlab.cli(["cover", "--n-max", "1", "--out", str(tmp_path / "c.txt")])
    assert code == 0 and "120" in out
    code, _, _ = nswlab.cli(["cover", "--n-max", "0", "--out", str(tmp_path / "c.txt")])
    assert code == 2
