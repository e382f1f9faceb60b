"""Localizers, localized powers, and the bracket identity verifications."""

from fractions import Fraction

import pytest

from stratakit import exactalg, localize, opalg
from stratakit.localize import (
    bound_scan_a,
    build_N,
    build_Rp_phi,
    extract_delta,
    verify_gamma_expansion,
    verify_localizer_bracket,
    verify_stirling_identity,
    verify_x2_bracket,
)
from stratakit.opalg import build_model, commutator, one, phi, rr


class TestLocalizerConstruction:
    def test_n0_is_identity(self):
        assert build_N(0, 2).op == one()

    def test_n1(self):
        m = build_model(2).M
        assert build_N(1, 2).op == m - one()

    def test_n2(self):
        m = build_model(3).M
        expected = one() - Fraction(3, 2) * m + Fraction(1, 2) * (m * m)
        assert build_N(2, 3).op == expected

    def test_table_too_small_rejected(self):
        small = exactalg.a_table_recurrence(2)
        with pytest.raises(ValueError):
            build_N(5, 2, table=small)


class TestLocalizedPower:
    def test_p0_is_phi(self):
        assert build_Rp_phi(0, 2).op == phi(0)

    def test_p1_expansion(self):
        m = build_model(2).M
        expected = phi(0) * rr() + phi(1) * (m - one())
        assert build_Rp_phi(1, 2).op == expected

    @pytest.mark.parametrize("p", [0, 1, 3, 6])
    def test_collapses_to_plain_power_where_cutoff_is_one(self, p):
        op = build_Rp_phi(p, 2).op.substitute_phi_unit()
        assert op == rr() ** p

    def test_shifted_family(self):
        shifted = build_Rp_phi(1, 2, base_derivative=3).op
        m = build_model(2).M
        assert shifted == phi(3) * rr() + phi(4) * (m - one())


class TestX2LocalizerBracket:
    def test_j1_by_hand(self):
        m = build_model(2)
        n1 = build_N(1, 2).op
        assert commutator(m.X2, n1) == -(opalg.tvar(2) * rr())

    @pytest.mark.parametrize("k", [2, 3])
    def test_zero_residual_through_j10(self, k):
        report = verify_localizer_bracket(10, k)
        assert report["pass"]
        assert all(c["residual_terms"] == 0 for c in report["cases"])

    def test_report_shape(self):
        report = verify_localizer_bracket(3, 2)
        assert report["identity"] == "x2-localizer-bracket"
        assert [c["j"] for c in report["cases"]] == [1, 2, 3]


class TestX2LocalizedPowerBracket:
    def test_p0_single_bracket(self):
        m = build_model(3)
        lhs = commutator(m.X2, phi(0))
        assert lhs == opalg.tvar(3) * phi(1)

    @pytest.mark.parametrize("k", [2, 3])
    def test_zero_residual_through_p10(self, k):
        report = verify_x2_bracket(10, k)
        assert report["pass"]

    def test_bracket_is_single_phi_term(self):
        # telescoping leaves only the phi^(p+1) N_p term: no monomial of the
        # bracket contains a phi derivative of order <= p
        k, p = 2, 5
        m = build_model(k)
        bracket = commutator(m.X2, build_Rp_phi(p, k).op)
        for (_, phis, _, _, _) in bracket.terms:
            assert phis == (p + 1,)


class TestDeltaExtraction:
    def test_p1_bracket_by_hand(self):
        m = build_model(2)
        bracket = commutator(m.X1, build_Rp_phi(1, 2).op)
        assert bracket == Fraction(1, 2) * (phi(1) * opalg.dt())

    def test_leading_delta_is_minus_one_over_k(self):
        for k in (2, 3, 5):
            report = extract_delta(3, k)
            assert report["delta_values"][0] == Fraction(-1, k)

    @pytest.mark.parametrize("k", [2, 3])
    def test_structural_pass_and_p_independence(self, k):
        report = extract_delta(8, k)
        assert report["pass"]
        assert report["delta_p_independent"]
        assert all(c["residual_terms"] == 0 for c in report["cases"])

    def test_hand_derived_head_values(self):
        # independent oracle: delta_0 = -1/k, delta_1 = 1/(2k) + 1/(2k^2),
        # delta_2 = -1/(3k) - 1/(2k^2) - 1/(6k^3), derived by expanding the
        # bracket polynomials over the localizer basis by hand
        for k in (2, 3, 4):
            got = extract_delta(4, k)["delta_values"]
            assert got[0] == Fraction(-1, k)
            assert got[1] == Fraction(1, 2 * k) + Fraction(1, 2 * k * k)
            assert got[2] == (
                Fraction(-1, 3 * k) - Fraction(1, 2 * k * k) - Fraction(1, 6 * k ** 3)
            )

    def test_bounded_by_one(self):
        assert extract_delta(8, 2)["delta_abs_le_1"]

    def test_neither_printed_convention_matches(self):
        report = extract_delta(6, 2)
        comparison = report["convention_comparison"]
        assert not comparison["positive"]["matches"]
        assert not comparison["alternating"]["matches"]
        # the shifted alternating form reproduces delta_0 only
        assert comparison["alternating-shifted"]["first_mismatch"] == 1

    def test_central_binomial_pattern_for_k2(self):
        # at k = 2 the extracted values are alternating central-binomial
        # ratios: |delta_l| = C(2l+2, l+1)/4^(l+1)
        from math import comb

        got = extract_delta(6, 2)["delta_values"]
        for ell, value in enumerate(got):
            expected = Fraction(comb(2 * ell + 2, ell + 1), 4 ** (ell + 1))
            assert abs(value) == expected
            assert (value < 0) == (ell % 2 == 0)


class TestGammaExpansion:
    def test_j1_single_term(self):
        for k in (2, 3):
            report = verify_gamma_expansion(1, k)
            assert report["gamma_values"] == [Fraction(-1, k)]

    @pytest.mark.parametrize("k", [2, 3])
    def test_exact_expansion_through_j8(self, k):
        report = verify_gamma_expansion(8, k)
        assert report["pass"]
        assert report["gamma_j_independent"]

    @pytest.mark.parametrize("k", [2, 3])
    def test_gamma_reproduces_operator_delta(self, k):
        gamma = verify_gamma_expansion(7, k)["gamma_values"]
        delta = extract_delta(7, k)["delta_values"]
        assert gamma == delta


class TestStirlingIdentity:
    def test_j2(self):
        report = verify_stirling_identity(2)
        assert report["pass"]

    def test_j3_row(self):
        expansion = (opalg.tvar() * opalg.dt()) ** 3
        assert expansion.terms[(1, (), 1, 0, 0)] == 1
        assert expansion.terms[(2, (), 2, 0, 0)] == 3
        assert expansion.terms[(3, (), 3, 0, 0)] == 1

    def test_through_j15(self):
        report = verify_stirling_identity(15)
        assert report["pass"]
        assert all(c["row_positive_integers"] for c in report["cases"])

    def test_factorial_row_sum_rate_bounded(self):
        report = verify_stirling_identity(15)
        assert all(c["factorial_row_sum_rate"] < 4.0 for c in report["cases"])


class TestBoundScan:
    def test_row_two_max(self):
        scan = bound_scan_a(4)
        row2 = next(e for e in scan["per_j_max"] if e["j"] == 2)
        assert row2["max_abs"] == "3/2"

    def test_row_zero(self):
        scan = bound_scan_a(2)
        assert scan["per_j_max"][0]["max_abs"] == "1/1"

    def test_rate_bounded_by_four_through_40(self):
        scan = bound_scan_a(40)
        assert 0 < scan["c_min_empirical"] <= 4.0

    def test_rejects_tiny_jmax(self):
        with pytest.raises(ValueError):
            bound_scan_a(1)


@pytest.mark.parametrize("k", [2, 3])
def test_phi_unit_collapse_is_consistent_on_both_sides(k):
    # substituting phi == 1 must collapse the verified identities coherently
    m = build_model(k)
    p = 4
    lhs = commutator(m.X2, build_Rp_phi(p, k).op).substitute_phi_unit()
    rhs = (opalg.tvar(k) * phi(p + 1) * build_N(p, k).op).substitute_phi_unit()
    assert lhs.is_zero and rhs.is_zero
    lhs1 = commutator(m.X1, build_Rp_phi(p, k).op).substitute_phi_unit()
    assert lhs1.is_zero
