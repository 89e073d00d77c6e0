import logging
import math

import pytest

from nematic2d.params import CoefficientError, LeslieCoefficients, derive_lambdas, validate


def test_derive_lambdas_reference():
    assert derive_lambdas(-2, 1, 1, 0) == (-3, 1)


def test_derive_lambdas_rejects_nan():
    with pytest.raises(CoefficientError):
        derive_lambdas(math.nan, 1, 1, 0)


def test_reference_set_is_admissible(reference):
    r = validate(reference)
    assert r.valid and bool(r)
    assert r.messages == []
    assert reference.lambda1 == -3 and reference.lambda2 == 1


@pytest.mark.parametrize("coeffs, flag", [
    ((0, -2, 1, 4, 2, 0), "parodi_ok"),
    ((0, 1, 1, 4, 0, 2), "lambda1_negative"),
    ((0, -2, 1, 0, 1, 0), "viscosity_positive"),
    ((-1, -2, 1, 4, 1, 0), "alignment_nonneg"),
    ((0, -2, 1, 4, -1, -2), "stretching_ok"),
])
def test_single_violation_sets_only_its_flag(coeffs, flag):
    r = validate(LeslieCoefficients(*coeffs))
    assert not r.valid
    assert not getattr(r, flag)
    others = {"parodi_ok", "lambda1_negative", "viscosity_positive",
              "alignment_nonneg", "stretching_ok"} - {flag}
    if flag == "lambda1_negative":
        # the alignment conditions divide by lambda1 and cannot be checked
        others -= {"alignment_nonneg", "stretching_ok"}
    assert all(getattr(r, o) for o in others), r


def test_mu4_message_cites_condition():
    r = validate(LeslieCoefficients(0, -2, 1, 0, 1, 0))
    assert any("mu4 > 0" in m for m in r.messages)


def test_boundary_weights_accepted_with_warning(caplog):
    # mu1 = lambda2^2 / lambda1 exactly: w1 = 0
    c = LeslieCoefficients(-1 / 3, -2, 1, 4, 1, 0)
    with caplog.at_level(logging.WARNING):
        r = validate(c)
    assert r.valid
    assert "undamped" in caplog.text


def test_derived_quantities_need_negative_lambda1():
    c = LeslieCoefficients(0, 1, 1, 4, 0, 2)
    with pytest.raises(CoefficientError):
        _ = c.gamma


def test_weights_and_ratio(generic):
    assert generic.gamma == pytest.approx(0.5)
    assert generic.ratio == pytest.approx(-0.5)
    assert generic.alignment_weight_1 == pytest.approx(0.5 + 0.5)
    assert generic.alignment_weight_2 == pytest.approx(1 - 0.5)


def test_sequence_round_trip():
    c = LeslieCoefficients.from_sequence([1, 2, 3, 4, 5, 6])
    assert c.as_tuple() == (1, 2, 3, 4, 5, 6)
    with pytest.raises(ValueError):
        LeslieCoefficients.from_sequence([1, 2, 3])
