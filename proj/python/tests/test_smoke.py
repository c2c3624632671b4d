import math

import pytest

import slitkit


def test_kinds_and_config_round_trip():
    assert "freeboundary" in slitkit.experiment_kinds()
    cfg = slitkit.ExperimentConfig.defaults("energy")
    again = slitkit.ExperimentConfig.parse(cfg.serialize())
    assert again == cfg
    assert again.hash_hex() == cfg.hash_hex()
    cfg.set("energy_level", "6")
    assert cfg.raw("energy_level") == "6"


def test_config_errors_are_typed():
    with pytest.raises(slitkit.ConfigInvalid, match="cells"):
        slitkit.ExperimentConfig.parse("kind = rates\ncells = abc\n")
    with pytest.raises(slitkit.SlitkitError):
        slitkit.run("solve", {"n": "2"})


def test_expand_run_passes():
    rep = slitkit.run("expand")
    assert rep["passed"]
    assert {c["criterion"] for c in rep["checks"]} == {1}
    assert rep["checks_csv"].startswith("criterion,name,passed,informational,measured")


def test_energy_report_files():
    rep = slitkit.run("energy", {"energy_level": "6"})
    assert rep["kind"] == "energy"
    assert "energy.csv" in rep["files"]


def test_tip_coefficient_and_mobius():
    phi = lambda t: math.cos(0.5 * t)
    assert slitkit.tip_coefficient(0.0, phi) == pytest.approx(1.0, abs=1e-12)
    a = slitkit.tip_coefficient(0.3, phi)
    assert slitkit.mobius_factor(0.3) == pytest.approx(1 / math.sqrt(1 - 0.09), rel=1e-14)
    assert a > 1.0 > slitkit.tip_coefficient(-0.3, phi)
    assert slitkit.tip_coefficient(0.3, lambda t: 3 * phi(t)) == pytest.approx(3 * a, rel=1e-12)


def test_series_of_u0_trace():
    c = slitkit.solve_series_2d(lambda t: math.cos(0.5 * t), 8)
    assert c[0] == pytest.approx(1.0, abs=1e-12)
    assert max(abs(x) for x in c[1:]) < 1e-12


def test_free_boundary_centred():
    res = slitkit.solve_free_boundary(lambda t: math.cos(0.5 * t), lambda g: 1.0)
    assert abs(res["gamma"]) <= 1e-6
    assert not res["multiple_roots"]
    with pytest.raises(slitkit.NoBracket):
        slitkit.solve_free_boundary(lambda t: math.cos(0.5 * t), lambda g: 5.0)


def test_u0_frames():
    f = slitkit.u0([0.3, 0.4])
    assert f["u0"] == pytest.approx(math.sqrt((0.5 + 0.3) / 2), rel=1e-14)
    curved = slitkit.u0([0.1, 0.2, 0.3], ["0", "0", "1/4"])
    assert curved["u0"] > 0
