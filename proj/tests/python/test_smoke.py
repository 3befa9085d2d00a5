import math

import pytest

import cwcs_py as cw


def test_catalog_names():
    assert "disk2_flat" in cw.catalog_names()


@pytest.mark.parametrize("k", [-2, 1, 3])
def test_monopole_chern_number(k):
    assert abs(cw.chern_number("sphere2_monopole", k=k) - k) < 1e-6
    assert abs(cw.ch_todd("sphere2_monopole", k=k) - (k + 1)) < 1e-6


def test_todd_genus_of_cp1():
    assert abs(cw.todd_genus("cp1_tangent") - 1.0) < 1e-6


@pytest.mark.parametrize("a", [0.1, 0.25, 0.7])
def test_disk_angle(a):
    assert abs(cw.disk_angle(a, resolution=32) - a) < 1e-10


def test_zn_order():
    r = cw.zn_pairing(3, 1, resolution=32)
    assert r["order_residual"] < 1e-6
    assert abs((r["value"].real + 1 / 3) % 1.0) < 1e-6 or abs((r["value"].real + 1 / 3) % 1.0 - 1) < 1e-6


def test_transgression_residual():
    n = 32
    assert cw.transgression_residual(2, n, 2) < 10.0 / n**2


def test_hopf_certificate_and_control():
    r = cw.hopf_certificate(l_max=2, resolution=12)
    assert r["pass"]
    assert max(lev["frame_trace"] for lev in r["levels"]) < 1e-10
    assert not cw.hopf_certificate(l_max=2, resolution=12, control=True)["pass"]


def test_eta_and_aps():
    assert abs(cw.hurwitz_zeta(2.0, 1.0) - math.pi**2 / 6) < 1e-12
    for a in (0.1, 0.25, 0.5, 0.9):
        r = cw.eta_invariant(a)
        assert abs(r["eta"] - (1 - 2 * a)) < 1e-4
        assert abs(r["abel"] - r["eta"]) < 1e-4
    sigma = cw.calibrate_aps_sign(16)
    assert cw.aps_check(0.37, sigma, resolution=16)["residual"] < 1e-4


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        cw.chern_number("klein_bottle")
    with pytest.raises(cw.SpectralError):
        cw.hurwitz_zeta(1.0, 0.5)
