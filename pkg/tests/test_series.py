"""Certified series: subsequence choice, coefficient formulas, enclosures.

Reference constants were recomputed independently before being frozen here:
exact Fraction partial sums with integral tail sandwiches on one side, and
mpmath.zeta at 40 digits on the other (both agree to all shown digits).

  zeta(2) = 1.6449340668482264365...
  zeta(3) = 1.2020569031595942854...
  zeta(4) = 1.0823232337111381916...
  zeta(5) = 1.0369277551433699263...
"""

from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import treeshift as ts
from treeshift import AlphaFamily, LINEAR_Q, MIXED_Q, SequenceSpec, Tail
from treeshift.errors import NoCertificateError, SupNotWitnessedError
from treeshift.series import (
    _DyadicSum,
    build_omega,
    dyadic_floor,
    finite_series_certificate,
    power_series_certificate,
    witness_partial_sum,
)

mp.mp.dps = 40

ZETA3 = Fraction("1.2020569031595942854")
ZETA2 = Fraction("1.6449340668482264365")


def contains_mpf(interval, value) -> bool:
    lo = mp.mpf(interval.lo.numerator) / interval.lo.denominator
    hi = mp.mpf(interval.hi.numerator) / interval.hi.denominator
    return lo <= value <= hi


# --- subsequence choice ---


def test_linear_omega_is_identity():
    omega = build_omega(LINEAR_Q)
    assert [omega.index(k) for k in range(1, 8)] == [1, 2, 3, 4, 5, 6, 7]
    assert omega.covers_all
    assert omega.contains(123456)


def test_mixed_omega_greedy():
    # q_1 = 1 >= 1, then even indices; greedy picks 1, 2, 4, 6, 8, ...
    omega = build_omega(MIXED_Q)
    assert [omega.index(k) for k in range(1, 7)] == [1, 2, 4, 6, 8, 10]
    assert omega.index(100) == 198
    assert not omega.covers_all
    assert omega.contains(1) and omega.contains(2) and omega.contains(198)
    assert not omega.contains(3) and not omega.contains(199)
    for k in range(1, 50):
        assert MIXED_Q.value(omega.index(k)) >= k


def test_bounded_sequence_rejected():
    flat = SequenceSpec(Tail.CONSTANT, prefix=(Fraction(1),))
    with pytest.raises(SupNotWitnessedError):
        build_omega(flat)


def test_table_prefix_stabilizes():
    q = SequenceSpec(Tail.LINEAR, prefix=(Fraction(5), Fraction(1, 2), Fraction(7)))
    omega = build_omega(q)
    for k in range(1, 40):
        assert q.value(omega.index(k)) >= k
        if k > 1:
            assert omega.index(k) > omega.index(k - 1)


# --- coefficient formulas ---


def test_on_omega_alpha_formula():
    omega = build_omega(LINEAR_Q)
    fam = AlphaFamily(LINEAR_Q, omega, power=1)
    assert fam.on_omega_value(3) == Fraction(1, 27)  # 1/(9*3)
    fam2 = AlphaFamily(LINEAR_Q, omega, power=2)
    assert fam2.on_omega_value(2) == Fraction(1, 16)  # 1/(4*4)
    assert fam2.on_omega_value(1) == 1  # k=1, q=1
    assert fam.value(5) == Fraction(1, 125)  # linear n=1: alpha_i = 1/i^3


def test_off_omega_alpha_formula():
    omega = build_omega(MIXED_Q)
    fam = AlphaFamily(MIXED_Q, omega, power=1)
    # off Omega: i odd >= 3, q_i = 1/i, row sum = sum_{k=1}^{i} (1/i)^{2-k}
    i = 5
    row = sum(Fraction(1, 5) ** (2 - k) for k in range(1, i + 1))
    assert fam.off_omega_value(i) == Fraction(1, 2**i) / row
    with pytest.raises(ValueError):
        fam.off_omega_value(2)  # on Omega


# --- convergent certificates ---


def test_zeta3_enclosure():
    omega = build_omega(LINEAR_Q)
    fam = AlphaFamily(LINEAR_Q, omega, power=1)
    cert = power_series_certificate(fam, 0)  # sum 1/i^3
    assert cert.is_convergent
    assert cert.width <= Fraction(1, 10**10)
    assert cert.enclosure.contains(ZETA3)
    assert contains_mpf(cert.enclosure, mp.zeta(3))


def test_zeta2_enclosure():
    omega = build_omega(LINEAR_Q)
    fam = AlphaFamily(LINEAR_Q, omega, power=1)
    cert = power_series_certificate(fam, 1)  # sum 1/i^2: the slow p = 2 case
    assert cert.is_convergent
    assert cert.enclosure.contains(ZETA2)
    assert contains_mpf(cert.enclosure, mp.zeta(2))
    assert cert.width <= Fraction(1, 10**10)


def test_negative_exponents_enclose_zeta():
    omega = build_omega(LINEAR_Q)
    fam = AlphaFamily(LINEAR_Q, omega, power=1)
    for l, s in ((-1, 4), (-2, 5), (-5, 8)):
        cert = power_series_certificate(fam, l)
        assert contains_mpf(cert.enclosure, mp.zeta(s))


def test_mixed_certificate_soundness():
    omega = build_omega(MIXED_Q)
    fam = AlphaFamily(MIXED_Q, omega, power=2)
    for l in range(-3, 3):
        cert = power_series_certificate(fam, l)
        assert cert.is_convergent
        # independent bracket: partial over i <= 399 covers on-Omega k <= 200,
        # whose remaining terms q^{l-n}/k^2 <= 1/k^2 sum to < 1/200; the
        # off-Omega remainder is < 2^-399
        partial = sum(
            (fam.value(i) * MIXED_Q.value(i) ** l for i in range(1, 400)), Fraction(0)
        )
        assert partial <= cert.enclosure.hi
        assert cert.enclosure.lo <= partial + Fraction(1, 200) + Fraction(1, 2**399)


def test_certificate_structure_invariants():
    omega = build_omega(LINEAR_Q)
    fam = AlphaFamily(LINEAR_Q, omega, power=2)
    cert = power_series_certificate(fam, 0)
    assert cert.partial_lo <= cert.partial_hi
    assert Fraction(0) <= cert.tail_lo <= cert.tail_hi
    assert cert.enclosure.lo == cert.partial_lo + cert.tail_lo
    assert cert.enclosure.hi == cert.partial_hi + cert.tail_hi
    # hi sits at least a full certified tail above the partial sum
    assert cert.enclosure.hi - cert.partial_hi >= cert.tail_hi


def test_convergence_monotone_in_exponent():
    omega = build_omega(MIXED_Q)
    fam = AlphaFamily(MIXED_Q, omega, power=3)
    verdicts = [power_series_certificate(fam, l).is_convergent for l in range(-4, 6)]
    # convergent exactly up to l = n = 3
    assert verdicts == [True] * 8 + [False] * 2


# --- divergent certificates ---


def test_harmonic_witness_crossing():
    omega = build_omega(LINEAR_Q)
    fam = AlphaFamily(LINEAR_Q, omega, power=1)
    cert = power_series_certificate(fam, 2)
    assert not cert.is_convergent
    assert cert.threshold == 10
    # first harmonic partial sum beyond 10 (verified by exact summation)
    assert cert.witness_index == 12367
    assert cert.witness_partial > 10
    assert witness_partial_sum(fam, 2, 12366) <= 10
    assert witness_partial_sum(fam, 2, 12367) == cert.witness_partial
    assert cert.witness_partial_lb > 10
    assert dyadic_floor(cert.witness_partial) == cert.witness_partial_lb
    assert "1/k" in cert.minorant


def test_mixed_witness_crossing():
    omega = build_omega(MIXED_Q)
    fam = AlphaFamily(MIXED_Q, omega, power=2)
    cert = power_series_certificate(fam, 3)
    assert not cert.is_convergent
    assert cert.witness_index == 261  # terms q_{i_k}/k^2, crossing T = 10
    assert witness_partial_sum(fam, 3, cert.witness_index) > 10


def test_far_supercritical_divergence():
    omega = build_omega(LINEAR_Q)
    fam = AlphaFamily(LINEAR_Q, omega, power=1)
    cert = power_series_certificate(fam, 4)  # terms q^3/k^2 = k
    assert not cert.is_convergent
    assert cert.witness_index <= 6


# --- scaling ---


def test_rescaled_enclosures_are_exact_multiples():
    omega = build_omega(LINEAR_Q)
    fam = AlphaFamily(LINEAR_Q, omega, power=1)
    r = Fraction(7, 3)
    scaled = fam.rescaled(r)
    for l in (0, 1, -2):
        base = power_series_certificate(fam, l)
        big = power_series_certificate(scaled, l)
        assert big.enclosure.lo == base.enclosure.lo * r
        assert big.enclosure.hi == base.enclosure.hi * r


# --- finite and uncertifiable coefficients ---


def test_finite_alpha_exact():
    values = (Fraction(1, 2), Fraction(0), Fraction(1, 3))
    cert = finite_series_certificate(LINEAR_Q, values, 2)
    assert cert.is_convergent
    assert cert.enclosure.is_point
    assert cert.enclosure.exact() == Fraction(1, 2) + Fraction(1, 3) * 9


def test_weighted_moment_series_dispatch(artifact_n1):
    cert = ts.weighted_moment_series(LINEAR_Q, artifact_n1.alpha, 0)
    assert cert.is_convergent
    cert = ts.weighted_moment_series(LINEAR_Q, [Fraction(1)], 5)
    assert cert.enclosure.exact() == 1
    with pytest.raises(NoCertificateError):
        ts.weighted_moment_series(LINEAR_Q, lambda i: Fraction(1, i), 0)


# --- the dyadic accumulator ---


@given(st.lists(st.fractions(min_value=0, max_value=10, max_denominator=10**6), max_size=60))
@settings(max_examples=120, deadline=None)
def test_dyadic_sum_brackets_true_sum(values):
    acc = _DyadicSum(bits=96)
    for v in values:
        acc.add(v)
    lo, hi = acc.bounds()
    total = sum(values, Fraction(0))
    assert lo <= total <= hi
    assert hi - lo <= Fraction(len(values), 2**96)
