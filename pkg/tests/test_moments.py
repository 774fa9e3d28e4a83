import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from onorm.haar import SamplerConfig
from onorm.moments import (
    ExactValue, ExponentVector, asymptotic_average, average_one_norm, double_factorial,
    mc_mean, moment_term, monte_carlo_moment, second_moment_lower_bound, sigma_compact,
    sigma_exponent, spherical_integral, weingarten_11_22,
)


def gamma_oracle(n, ks):
    """E|prod x_i^k_i| on S^(n-1) as a ratio of Gaussian moments, via log-gamma."""
    k_total = sum(ks)
    log_num = sum(k / 2 * math.log(2) + math.lgamma((k + 1) / 2) - 0.5 * math.log(math.pi) for k in ks)
    log_den = k_total / 2 * math.log(2) + math.lgamma((n + k_total) / 2) - math.lgamma(n / 2)
    return math.exp(log_num - log_den)


def test_double_factorial_examples():
    assert [double_factorial(m) for m in range(0, 9)] == [1, 1, 1, 2, 3, 8, 15, 48, 105]
    assert double_factorial(5) == 8 and double_factorial(4) == 3
    with pytest.raises(ValueError):
        double_factorial(-1)


def test_sigma_rules_agree_exhaustively():
    for n in range(1, 51):
        for odds in range(0, min(n, 50) + 1):
            rule = odds // 2 if n % 2 else (odds + 1) // 2
            assert sigma_compact(n, odds) == rule
            assert sigma_exponent(n, [1] * odds + [2] * (n - odds)) == rule


def test_spherical_examples():
    assert spherical_integral(3, [1]) == ExactValue(Fraction(1, 2), 0)
    assert str(spherical_integral(3, [1])) == "1/2"
    assert spherical_integral(2, [1]) == ExactValue(Fraction(1), 1)
    assert spherical_integral(4, [2]) == ExactValue(Fraction(1, 4), 0)
    assert float(spherical_integral(5, [0])) == 1.0
    assert str(spherical_integral(2, [1, 1])) == "1/2 * (2/pi)^1"
    with pytest.raises(ValueError):
        spherical_integral(2, [1, 1, 1])
    with pytest.raises(ValueError):
        spherical_integral(3, [-1])


def test_spherical_against_gamma_oracle():
    for n in range(1, 12):
        for p in range(1, min(n, 4) + 1):
            for ks in itertools.product(range(0, 7), repeat=p):
                assert float(spherical_integral(n, ks)) == pytest.approx(gamma_oracle(n, ks), rel=1e-12)


@given(st.integers(1, 40), st.data())
def test_spherical_against_gamma_oracle_random(n, data):
    ks = data.draw(st.lists(st.integers(0, 12), min_size=1, max_size=min(n, 6)))
    assert float(spherical_integral(n, ks)) == pytest.approx(gamma_oracle(n, ks), rel=1e-11)


def test_circle_quadrature():
    for p, q in itertools.product(range(7), repeat=2):
        val, _ = quad(lambda t: math.cos(t) ** p * math.sin(t) ** q, 0, math.pi / 2, epsabs=1e-13)
        assert abs(float(spherical_integral(2, [p, q])) - 2 / math.pi * val) <= 1e-10


def test_exact_value_arithmetic():
    v = spherical_integral(2, [1])
    assert float(v * 3) == pytest.approx(6 / math.pi)
    assert float(Fraction(1, 2) * v) == pytest.approx(1 / math.pi)
    assert (v * v).pi_exponent == 2
    assert ExponentVector(4, (1, 2, 3)).odds == 2


def test_averages():
    assert average_one_norm(2) == ExactValue(Fraction(4), 1)
    assert float(average_one_norm(2)) == pytest.approx(8 / math.pi, rel=1e-15)
    assert average_one_norm(3) == ExactValue(Fraction(9, 2), 0)
    assert asymptotic_average(1) == pytest.approx(0.7979, abs=1e-4)
    assert asymptotic_average(4) == pytest.approx(6.383, abs=1e-3)
    # the exact average approaches sqrt(2/pi) n sqrt(n)
    assert float(average_one_norm(400)) / asymptotic_average(400) == pytest.approx(1, abs=2e-3)
    for n in range(1, 30):
        assert float(average_one_norm(n)) <= n * math.sqrt(n) + 1e-12


def test_weingarten_and_second_moment():
    assert weingarten_11_22(2) == Fraction(3, 8)
    assert weingarten_11_22(3) == Fraction(2, 15)
    assert second_moment_lower_bound(2) == pytest.approx(2 + 8 / math.pi + 1.5, abs=1e-12)
    assert second_moment_lower_bound(2) == pytest.approx(6.046, abs=1e-3)
    assert second_moment_lower_bound(3) == pytest.approx(3 + 24 / math.pi + 4.8, abs=1e-12)
    ratio = second_moment_lower_bound(100) / ((1 + 4 / math.pi) * 100**2)
    assert ratio == pytest.approx(0.990, abs=1e-3)
    with pytest.raises(ValueError):
        weingarten_11_22(1)


def test_weingarten_monte_carlo():
    mean, se = mc_mean(lambda u: u[:, 0, 0] ** 2 * u[:, 1, 1] ** 2, 3, 400_000, SamplerConfig(7))
    assert abs(mean - 2 / 15) <= 4 * se


def test_monte_carlo_first_moment_matches_exact():
    est = monte_carlo_moment(3, 1, 200_000, SamplerConfig(21))
    assert abs(est.mean - 4.5) <= 4 * est.std_error
    assert est.kn_lower_bound == est.mean
    assert est.to_dict()["samples"] == 200_000


def test_monte_carlo_second_moment_above_bound():
    est = monte_carlo_moment(4, 2, 200_000, SamplerConfig(22))
    assert est.mean >= second_moment_lower_bound(4) - 4 * est.std_error
    assert est.kn_lower_bound <= 8 + 1e-12


def test_moment_term():
    est = moment_term(3, [0, 0], [0, 1], 300_000, SamplerConfig(23))
    assert abs(est.mean - 2 / (3 * math.pi)) <= 4 * est.std_error
    est = moment_term(4, [0], [0], 300_000, SamplerConfig(24))
    assert abs(est.mean - float(spherical_integral(4, [1]))) <= 4 * est.std_error
    with pytest.raises(ValueError, match="out of scope"):
        moment_term(6, [0] * 5, [0, 1, 2, 3, 4], 1000, SamplerConfig(0))
    with pytest.raises(ValueError):
        moment_term(3, [0, 1], [0], 1000, SamplerConfig(0))
    with pytest.raises(IndexError):
        moment_term(3, [3], [0], 1000, SamplerConfig(0))


def test_argument_validation():
    with pytest.raises(ValueError):
        monte_carlo_moment(3, 1, 50, SamplerConfig(0))
    with pytest.raises(ValueError):
        monte_carlo_moment(3, 0, 1000, SamplerConfig(0))
    with pytest.raises(ValueError):
        average_one_norm(0)


def test_thread_count_does_not_change_results():
    a = monte_carlo_moment(4, 3, 180_000, SamplerConfig(25), threads=1)
    b = monte_carlo_moment(4, 3, 180_000, SamplerConfig(25), threads=4)
    assert a == b


def test_shard_merge_matches_direct_statistics():
    # one shard versus several: same samples, so same mean up to rounding
    from onorm.haar import sample_haar_batch
    from onorm.moments import SHARD_SIZE
    samples = 2 * SHARD_SIZE + 17
    mean, se = mc_mean(lambda u: u[:, 0, 0], 2, samples, SamplerConfig(26))
    direct = np.concatenate([
        sample_haar_batch(2, SHARD_SIZE, SamplerConfig(26, 0))[:, 0, 0],
        sample_haar_batch(2, SHARD_SIZE, SamplerConfig(26, 1))[:, 0, 0],
        sample_haar_batch(2, 17, SamplerConfig(26, 2))[:, 0, 0],
    ])
    assert mean == pytest.approx(direct.mean(), abs=1e-15)
    assert se == pytest.approx(direct.std(ddof=1) / math.sqrt(samples), rel=1e-10)
