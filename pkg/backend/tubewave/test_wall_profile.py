import numpy as np
import pytest

from wall_profile import (
    AsymptoticsViolated, BadParameter, PositivityViolation, ProfileFamily, TabulatedSpline,
    check_asymptotics, make_channel, make_profile, normalize_family,
)


def test_homogeneous_is_identity():
    profile = make_profile("Homogeneous")
    g, d1, d2 = profile.g1.evaluate(np.array([0.0, 3.0, 1e6]))
    assert np.all(g == 1) and not np.any(d1) and not np.any(d2)
    assert profile.is_homogeneous


def test_exponential_bump_at_origin():
    channel = make_channel("ExponentialBump", {"amplitude": 0.5, "decay_rate": 1.0})
    assert [float(v) for v in channel.evaluate(0.0)] == pytest.approx([1.5, -0.5, 0.5])


def test_negative_bump_violates_positivity():
    with pytest.raises(PositivityViolation):
        make_channel("ExponentialBump", {"amplitude": -2.0, "decay_rate": 1.0})


def test_missing_parameters():
    with pytest.raises(BadParameter):
        make_channel("RationalDecay", {"amplitude": 0.1})
    with pytest.raises(BadParameter):
        make_channel("ExponentialBump", {"amplitude": 0.1, "decay_rate": -1.0})


@pytest.mark.parametrize(
    "family, params",
    [
        ("ExponentialBump", {"amplitude": 0.3, "decay_rate": 0.7}),
        ("RationalDecay", {"amplitude": -0.4, "decay_rate": 2.0}),
        ("TabulatedSpline", {"x": [0, 1, 2, 3, 4], "g": [1.2, 1.1, 0.9, 1.05, 1.0], "blend_width": 2.0}),
    ],
)
def test_derivatives_match_finite_differences(family, params):
    channel = make_channel(family, params)
    x = np.random.default_rng(7).uniform(0.1, 5.5, 40)
    # keep clear of spline knots and the blend start, where g''' jumps
    x = x[np.min(np.abs(x[:, None] - np.arange(7.0)[None, :]), axis=1) > 1e-2]
    h = 1e-4
    g_plus, d1_plus, _ = channel.evaluate(x + h)
    g_minus, d1_minus, _ = channel.evaluate(x - h)
    _, d1, d2 = channel.evaluate(x)
    assert np.max(np.abs((g_plus - g_minus) / (2 * h) - d1)) < 1e-6
    assert np.max(np.abs((d1_plus - d1_minus) / (2 * h) - d2)) < 1e-6


def test_check_asymptotics_homogeneous():
    report = check_asymptotics(make_profile("Homogeneous"), 10.0, 1e-12)
    assert report.residual == 0.0


def test_check_asymptotics_exponential_tail():
    profile = make_profile("ExponentialBump", {"amplitude": 0.5, "decay_rate": 1.0})
    report = check_asymptotics(profile, 60.0, 1e-20)
    assert report.residual == pytest.approx(0.5 * np.exp(-60.0), rel=1e-12)
    assert report.location == 60.0
    assert report.decaying


def test_check_asymptotics_reports_the_ladder_peak():
    profile = make_profile("ExponentialBump", {"amplitude": 0.5, "decay_rate": 1.0})
    report = check_asymptotics(profile, 60.0, 1e-20)
    assert report.peak >= report.residual
    assert report.peak_location == report.ladder[0][0] == 30.0
    assert report.peak == pytest.approx(0.5 * np.exp(-30.0), rel=1e-12)
    assert report.peak_channel == "g1"


def test_unblended_table_never_reaches_one(tmp_path):
    table = tmp_path / "step.txt"
    table.write_text("0 1.0\n1 1.2\n2 1.6\n3 2.0\n4 2.0\n")
    channel = make_channel("TabulatedSpline", {"table": str(table), "blend": False})
    assert isinstance(channel, TabulatedSpline)
    profile = make_profile("TabulatedSpline", {"table": str(table), "blend": False}, g2_family="Homogeneous")
    with pytest.raises(AsymptoticsViolated):
        check_asymptotics(profile, 50.0, 1e-6)
    assert channel.tail_factor(50.0) == np.inf


def test_blended_table_reaches_one():
    channel = make_channel("TabulatedSpline", {"x": [0, 1, 2, 3], "g": [1.5, 1.3, 1.1, 1.0], "blend_width": 1.0})
    g, d1, d2 = channel.evaluate(np.array([4.0, 10.0]))
    assert np.allclose(g, 1.0) and np.allclose(d1, 0.0) and np.allclose(d2, 0.0)


def test_family_names_are_forgiving():
    assert normalize_family("exponential_bump") is ProfileFamily.EXPONENTIAL_BUMP
    assert normalize_family("rational decay") is ProfileFamily.RATIONAL_DECAY
    with pytest.raises(BadParameter):
        normalize_family("sawtooth")
