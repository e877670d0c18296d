import math

import pytest

from anisocheck import constants as co

SQRT2 = math.sqrt(2.0)


def test_spectral_lambda_pinched_case_closed_form():
    lam = co.spectral_lambda(3, 1.0 / SQRT2, co.C0)
    assert lam == pytest.approx(3 * (5 + 3 * SQRT2) / 56, rel=1e-14)
    assert lam == pytest.approx(0.495, abs=5e-4)


def test_spectral_lambda_minimal_case_via_pipeline():
    assert co.spectral_lambda(3, 1.0, 1.0) == pytest.approx(0.75, abs=0.0)
    # general n: lambda = n(n-2)/4 when Lambda = 1, c0 = 1
    assert co.spectral_lambda(4, 1.0, 1.0) == pytest.approx(2.0, abs=0.0)


def test_spectral_lambda_domain():
    with pytest.raises(ValueError):
        co.spectral_lambda(3, 0.5, 1.0)
    with pytest.raises(ValueError):
        co.spectral_lambda(3, 0.4, 1.09)
    # a legal but unhelpful combination produces a negative constant
    assert co.spectral_lambda(3, 0.51, 1.09) < 0.0


def test_c0_and_beta_cross_check():
    c0, beta = co.c0_and_beta()
    assert c0 == pytest.approx(1.0 / (SQRT2 - 0.5), rel=1e-15)
    assert abs(c0 - 1.09) < 5e-3
    assert beta == pytest.approx(4 * (1 / SQRT2 - 0.5) / (3 * (c0 - 1)), rel=1e-14)
    lam = co.spectral_lambda(3, 1.0 / SQRT2, c0)
    assert 1.5 * (0.5 - 0.5 / beta) == pytest.approx(lam, rel=1e-14)
    c0_min, beta_min = co.c0_and_beta(c0=1.0)
    assert beta_min == math.inf  # no absorption weight needed


def test_quadratic_lemma_intermediate_identity():
    assert 1.0 - (1.5 - SQRT2) == pytest.approx(SQRT2 - 0.5, rel=1e-15)


def test_remark_constants_relations():
    rc = co.remark_constants(SQRT2, 1.0)
    assert rc.Q == pytest.approx(math.exp(7 * math.pi / math.sqrt(rc.lam)), rel=1e-13)
    assert rc.rho0 == pytest.approx(math.exp(-5 * math.pi / math.sqrt(rc.lam)),
                                    rel=1e-13)
    assert rc.V1 == pytest.approx(8 * SQRT2 * math.pi / (3 * rc.lam), rel=1e-13)
    assert rc.V1 / rc.V0 == pytest.approx(
        math.exp(-15 * math.pi / math.sqrt(rc.lam)), rel=1e-12)
    printed = co.remark_constants(SQRT2, 1.0, variant="as-printed")
    assert printed.V0 > rc.V0  # 15 pi / lambda exceeds 15 pi / sqrt(lambda)
    assert printed.V1 == pytest.approx(rc.V1, rel=1e-15)


def test_remark_constants_monotonicity():
    rc = co.remark_constants(SQRT2, 1.0)
    more_c1 = co.remark_constants(1.5 * SQRT2, 1.0)
    assert more_c1.V0 > rc.V0 and more_c1.V1 > rc.V1
    lower_lam = co.remark_constants(SQRT2, 1.0, lam=0.9 * rc.lam)
    assert lower_lam.V0 > rc.V0 and lower_lam.V1 > rc.V1
    # a weaker spectral constant inflates the volume/ratio bounds but
    # shrinks the safe inner radius rho0 = e^(-5 pi / sqrt(lambda))
    assert lower_lam.Q > rc.Q and lower_lam.rho0 < rc.rho0


def test_remark_constants_validation():
    with pytest.raises(ValueError):
        co.remark_constants(0.5, 1.0)
    with pytest.raises(ValueError):
        co.remark_constants(SQRT2, 1.0, variant="bogus")
    with pytest.raises(ValueError):
        co.remark_constants(SQRT2, 1.0, lam=-0.1)


def test_minimal_case_table_consistency():
    mc = co.minimal_case_constants()
    assert mc.value("area_bound_min_case") == pytest.approx(32 * math.pi / 3,
                                                            rel=1e-14)
    assert mc.value("diameter_bound_min_case") == pytest.approx(
        4 * math.pi / math.sqrt(3.0), rel=1e-14)
    assert mc.value("rho0_min_case") == pytest.approx(
        math.exp(-10 * math.pi / math.sqrt(3.0)), rel=1e-14)
    vol = (32 * math.pi / 3) ** 1.5 * math.exp(30 * math.pi / math.sqrt(3.0)) \
        / (6 * math.sqrt(math.pi))
    assert mc.value("volume_coefficient") == pytest.approx(vol, rel=1e-14)
    assert mc.value("local_volume_coefficient") == pytest.approx(
        (32 * math.pi / 3) ** 1.5 / (6 * math.sqrt(math.pi)), rel=1e-14)
    # 5 pi / sqrt(3/4) = 10 pi / sqrt(3)
    assert 5 * math.pi / math.sqrt(0.75) == pytest.approx(
        10 * math.pi / math.sqrt(3.0), rel=1e-15)


def test_every_entry_rederives_via_extended_precision():
    table = co.build_table()
    for entry in table.entries.values():
        assert entry.rederivation_error() <= 1e-14, entry.name
        # the plain-double route agrees with the 15-digit value
        assert abs(entry.value_double - entry.value) <= 5e-13 * max(1.0, abs(entry.value))


def test_expression_evaluator_is_restricted():
    assert float(co.eval_expression("sqrt(2)")) == pytest.approx(SQRT2, rel=1e-15)
    with pytest.raises(Exception):
        co.eval_expression("__import__('os')")


def test_table_text_renders_all_rows():
    table = co.build_table()
    text = table.text_table()
    assert len(text.splitlines()) == 1 + len(table.entries)
    assert "lambda" in text
