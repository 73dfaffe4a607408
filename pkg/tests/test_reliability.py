import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crowdcharge.model import ModelError, ReliabilityProfile
from crowdcharge.reliability import (
    InsufficientData,
    SocSeries,
    eub_from_soc,
    normalized_entropy,
    profile_reliability,
    provision_success,
    reliability_score,
)


def test_provision_success_ratio():
    assert provision_success(7, 10) == 0.7
    assert provision_success(0, 0) == 1.0
    with pytest.raises(ModelError):
        provision_success(5, 3)


def test_eub_two_bins_against_hand_entropy():
    # dyadic levels keep the deltas exact: -1, -1, -1, -2 (per 8 minutes)
    soc = [1.0, 0.875, 0.75, 0.625, 0.375]
    series = SocSeries("o", tuple((i, s) for i, s in enumerate(soc)))
    h = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    assert eub_from_soc(series, bins=2) == pytest.approx(1 - h / math.log(2), rel=1e-12)
    assert eub_from_soc(series, bins=2) == pytest.approx(0.1887, abs=1e-4)


def test_constant_discharge_is_fully_regular():
    series = SocSeries("o", tuple((10 * i, 1 - 0.05 * i) for i in range(10)))
    assert eub_from_soc(series) == pytest.approx(1.0)


def test_uniform_deltas_score_zero():
    assert normalized_entropy([0.0, 1.0], bins=2) == pytest.approx(1.0)


def test_too_short_series():
    with pytest.raises(InsufficientData):
        eub_from_soc(SocSeries("o", ((0, 0.5),)))


def test_series_validation():
    with pytest.raises(ModelError):
        SocSeries("o", ((0, 0.5), (0, 0.4)))
    with pytest.raises(ModelError):
        SocSeries("o", ((0, 1.5),))


def test_profile_score_is_product():
    assert profile_reliability(ReliabilityProfile("o", 0.5, 3, 4)) == pytest.approx(0.375)


@given(st.lists(st.floats(0, 1), min_size=3, max_size=40), st.integers(2, 12))
def test_eub_bounded(levels, bins):
    series = SocSeries("o", tuple(enumerate(levels)))
    assert 0.0 <= eub_from_soc(series, bins) <= 1.0


@given(st.floats(0, 1), st.floats(0, 1))
def test_score_bounded_by_factors(eub, pb):
    r = reliability_score(eub, pb)
    assert 0.0 <= r <= min(eub, pb)
