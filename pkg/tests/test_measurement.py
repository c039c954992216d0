import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from kcqlab import rng as rngmod
from kcqlab.cipher import AlphaEtaParams
from kcqlab.measurement import (
    ChannelSpec,
    MeasurementRecord,
    amplifier_moments,
    amplify,
    analytic_ber,
    bob_decide,
    discretize,
    exact_ber,
    heterodyne_phase_density,
    heterodyne_sample,
    homodyne_sample,
    monte_carlo_ber,
    phase_sample,
    sector_probabilities,
    split,
)

N = 10**6


def gaussian_tail(mean: float, var: float) -> float:
    """P(N(mean, var) < 0) by quadrature."""
    sd = math.sqrt(var)
    val, _ = integrate.quad(lambda x: math.exp(-((x - mean) ** 2) / (2 * var)) / (sd * math.sqrt(2 * math.pi)), -np.inf, 0)
    return val


def within_4_sigma(rate, p, n):
    return abs(rate - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_split_examples():
    bob, eve = split(1 + 2j, 1.0)
    assert bob == 1 + 2j and eve == 0
    bob, eve = split(math.sqrt(2), 0.5)
    assert bob == pytest.approx(1.0) and eve == pytest.approx(1.0)
    with pytest.raises(ValueError):
        split(1.0, 0.0)


@given(st.complex_numbers(max_magnitude=100, allow_nan=False), st.floats(1e-6, 1.0))
def test_split_conserves_energy(a, eta):
    bob, eve = split(a, eta)
    assert abs(bob) ** 2 + abs(eve) ** 2 == pytest.approx(abs(a) ** 2, rel=1e-12, abs=1e-12)


def test_channel_spec_validation():
    with pytest.raises(ValueError):
        ChannelSpec(eta=1.5)
    with pytest.raises(ValueError):
        ChannelSpec(gain=0.5)
    with pytest.raises(ValueError):
        MeasurementRecord("unknown", np.zeros(1))


def test_heterodyne_moments():
    g = rngmod.block_rng(11, "test/het", 0)
    y = heterodyne_sample(3.0, g, size=N)
    se = math.sqrt(0.5 / N)
    assert abs(y.real.mean() - 3.0) < 4 * se and abs(y.imag.mean()) < 4 * se
    se_var = 0.5 * math.sqrt(2 / (N - 1))
    assert abs(y.real.var(ddof=1) - 0.5) < 4 * se_var and abs(y.imag.var(ddof=1) - 0.5) < 4 * se_var


def test_heterodyne_ber_s2():
    ref = gaussian_tail(math.sqrt(2), 0.5)
    assert ref == pytest.approx(0.02275, abs=1e-5)
    assert exact_ber("heterodyne", 2) == pytest.approx(ref, rel=1e-10)
    est = monte_carlo_ber("heterodyne", 2.0, N, 5)
    assert within_4_sigma(est.rate, ref, N)


def test_homodyne_ber_s2():
    ref = gaussian_tail(math.sqrt(2), 0.25)
    assert exact_ber("homodyne", 2) == pytest.approx(ref, rel=1e-10)
    est = monte_carlo_ber("homodyne", 2.0, N, 6)
    assert within_4_sigma(est.rate, ref, N)


def test_homodyne_sample_axis():
    g = np.random.default_rng(0)
    q = homodyne_sample(2j, math.pi / 2, g, size=N)
    assert abs(q.mean() - 2.0) < 4 * math.sqrt(0.25 / N)


def test_phase_sample_concentrated():
    g = np.random.default_rng(1)
    phi = phase_sample(100.0, g, size=10**5)
    circ_std = math.sqrt(-2 * math.log(abs(np.exp(1j * phi).mean())))
    assert circ_std < 0.02
    assert ((phi >= 0) & (phi < 2 * math.pi)).all()


def test_phase_sample_vacuum_uniform():
    g = np.random.default_rng(2)
    phi = phase_sample(0.0, g, size=10**5)
    assert stats.kstest(phi / (2 * math.pi), "uniform").pvalue > 0.01


def test_phase_proxy_between_curves():
    S = 7.0
    est = monte_carlo_ber("phase-proxy", S, N, 9)
    assert analytic_ber("phase", S) < est.rate < analytic_ber("heterodyne", S)


def test_analytic_values_s7():
    assert analytic_ber("optimal", 7) == pytest.approx(1.73e-13, rel=1e-2)
    assert analytic_ber("heterodyne", 7) == pytest.approx(4.56e-4, rel=1e-2)
    assert analytic_ber("phase", 7) == pytest.approx(4.16e-7, rel=1e-2)
    assert analytic_ber("optimal", 7, exact=True) == pytest.approx(0.25 * math.exp(-28), rel=1e-2)
    assert analytic_ber("phase", 7, exact=True) is None
    with pytest.raises(ValueError):
        analytic_ber("optimal", 0)
    with pytest.raises(ValueError):
        analytic_ber("magic", 1)


@given(st.floats(0.5, 20))
def test_analytic_ordering(S):
    assert analytic_ber("optimal", S) < analytic_ber("phase", S) < analytic_ber("heterodyne", S)


def test_amplify_identity():
    g = np.random.default_rng(0)
    a = np.array([1 + 1j, -2.0])
    np.testing.assert_array_equal(amplify(a, 1.0, g), a)
    with pytest.raises(ValueError):
        amplify(a, 0.9, g)


def test_amplifier_moments_g4():
    m = amplifier_moments(1.0, 4.0, N, 3)
    assert m.expected_mean == pytest.approx(2.0)
    assert m.expected_var == pytest.approx(2.0)
    assert all(abs(z) < 4 for z in m.z_scores().values())


def test_discretize_conventions():
    M = 8
    for m in range(M):
        assert discretize(2 * math.pi * m / M, M) == m
        assert discretize(2 * math.pi * m / M + math.pi / M - 1e-9, M) == m
    assert discretize(np.exp(1j * math.pi), 4) == 2
    with pytest.raises(ValueError):
        discretize(0.0, 6)


def test_discretize_uniform_histogram():
    g = np.random.default_rng(4)
    counts = np.bincount(discretize(g.uniform(0, 2 * math.pi, size=N), 8), minlength=8)
    assert stats.chisquare(counts).pvalue > 0.01


@pytest.mark.parametrize("S,M", [(0.1, 32), (1.0, 8), (4.0, 4)])
def test_sector_probabilities_vs_histogram(S, M):
    p = sector_probabilities(S, M)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    total, _ = integrate.quad(heterodyne_phase_density, -math.pi, math.pi, args=(S,))
    assert total == pytest.approx(1.0, abs=1e-10)
    g = np.random.default_rng(5)
    counts = np.bincount(discretize(heterodyne_sample(math.sqrt(S), g, size=N), M), minlength=M)
    se = np.sqrt(p * (1 - p) / N)
    assert np.all(np.abs(counts / N - p) <= 4 * se + 1e-12)


def test_bob_ideal_helstrom_s7_no_errors():
    est = monte_carlo_ber("ideal-helstrom", 7.0, 10**7, 8)
    assert est.errors == 0


def test_bob_ideal_helstrom_moderate_signal():
    est = monte_carlo_ber("ideal-helstrom", 0.3, N, 8)
    assert abs(est.z_score) < 4


@pytest.mark.parametrize("mode", ["ideal-helstrom", "homodyne", "heterodyne", "phase-proxy"])
def test_no_signal_is_coin_flip(mode):
    est = monte_carlo_ber(mode, 1e-12, 10**5, 10)
    assert within_4_sigma(est.rate, 0.5, 10**5)


def test_bob_decide_validation_and_keyed_bit():
    p = AlphaEtaParams(8, 4.0)
    g = np.random.default_rng(0)
    with pytest.raises(ValueError):
        bob_decide(p, 4, "homodyne", 1.0, g)
    with pytest.raises(ValueError):
        bob_decide(p, 0, "guess", 1.0, g)
    # basis 1 carries bit 1 on its positive axis, bit 0 on the opposite one
    assert bob_decide(p, 1, "homodyne", 50 * np.exp(1j * p.angle(1)), g) == 1
    assert bob_decide(p, 1, "heterodyne", -50 * np.exp(1j * p.angle(1)), g) == 0


def test_monte_carlo_thread_independent(monkeypatch):
    monkeypatch.setenv(rngmod.THREADS_ENV, "1")
    a = monte_carlo_ber("heterodyne", 1.0, 300_000, 42)
    monkeypatch.setenv(rngmod.THREADS_ENV, "4")
    b = monte_carlo_ber("heterodyne", 1.0, 300_000, 42)
    assert a.errors == b.errors


def test_thread_cap_validation(monkeypatch):
    monkeypatch.setenv(rngmod.THREADS_ENV, "zero")
    with pytest.raises(ValueError):
        rngmod.thread_cap()
    monkeypatch.setenv(rngmod.THREADS_ENV, "0")
    with pytest.raises(ValueError):
        rngmod.thread_cap()


def test_block_rng_seed_range():
    with pytest.raises(ValueError):
        rngmod.block_rng(-1, "x", 0)
    a = rngmod.block_rng(2**64 - 1, "x", 3).random(4)
    b = rngmod.block_rng(2**64 - 1, "x", 3).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, rngmod.block_rng(2**64 - 1, "y", 3).random(4))
