import math

import numpy as np
import pytest

import leraykit as lk


def test_circle_and_sphere_area():
    assert lk.area(lk.circle(), 64) == pytest.approx(2 * math.pi, rel=1e-12)
    assert lk.area(lk.sphere(2), 16) == pytest.approx(2 * math.pi**2, rel=1e-10)


def test_lp_sphere_beltrami_modulus():
    s = lk.lp_sphere(3.0)
    z1 = 0.5 + 0.3j
    z2 = (1 - abs(z1) ** 3) ** (1 / 3) * np.exp(0.4j)
    inv = lk.invariants(s, np.array([z1, z2]))
    assert abs(inv["b"]) == pytest.approx(1 / 3, abs=1e-10)
    assert inv["phi"] == pytest.approx(1 - 1 / 9, abs=1e-10)
    assert lk.roundtrip_error(s, np.array([z1, z2])) < 1e-9


def test_cauchy_norms():
    assert lk.cauchy_norm(lk.circle(), 64) == pytest.approx(1.0, abs=1e-10)
    assert lk.cauchy_norm(lk.ellipse(2.0), 256) > 1.01
    e = lk.efficiency(lk.ellipse(1.5), 256, 8)
    assert e["infsup"] == pytest.approx(1 / e["norm"], abs=2e-3)


def test_transfer_and_rigid():
    r = lk.transfer_residuals(lk.sphere(2), 8)
    assert r["isometry"] < 1e-8
    assert lk.rigid_residual_max("0.3", 1 / 32) < 1e-12


def test_run_config_and_errors():
    report, csv, ok = lk.run(
        {"command": "cauchy-norm", "surface": {"family": "circle"}, "resolutions": [32, 64]}
    )
    assert ok
    assert report["schema"] == 1
    assert report["norm"] == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        lk.run("{not json")
    with pytest.raises(ValueError):
        lk.custom_graph("abs2(z1", 2)
