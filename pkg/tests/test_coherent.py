import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcqlab.attacks.orthogonality import HAMMING_7_4, codewords
from kcqlab.coherent import gram_matrix, gram_prefixes, helstrom_error, overlap, pairwise_bound, pgm_error

amplitudes = st.complex_numbers(max_magnitude=math.sqrt(10), allow_nan=False, allow_infinity=False)


def fock_overlap(a: complex, b: complex, terms: int = 60) -> complex:
    """<a|b> from the truncated number-state expansion."""
    z = np.conj(a) * b
    series = sum(z**n / math.factorial(n) for n in range(terms))
    return complex(series * math.exp(-(abs(a) ** 2 + abs(b) ** 2) / 2))


def test_overlap_identical_states():
    o = overlap(0, 0)
    assert o.magnitude == 1.0 and o.phase == 0.0


def test_overlap_antipodal_unit():
    assert overlap(1, -1).magnitude == pytest.approx(math.exp(-2), abs=1e-15)
    assert abs(overlap(1, -1).value - fock_overlap(1, -1)) < 1e-12
    assert overlap(1, -1).magnitude == pytest.approx(0.13534, abs=1e-5)


def test_overlap_tapped_antipodal():
    a = math.sqrt(0.5) * math.sqrt(0.5)
    assert overlap(a, -a).magnitude == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert abs(fock_overlap(a, -a)) == pytest.approx(0.60653, abs=1e-5)


@settings(max_examples=200, deadline=None)
@given(amplitudes, amplitudes)
def test_overlap_matches_fock_series(a, b):
    o = overlap(a, b)
    assert abs(o.value - fock_overlap(a, b)) < 1e-10
    assert 0.0 <= o.magnitude <= 1.0


@given(amplitudes, amplitudes)
def test_overlap_unit_only_for_equal_amplitudes(a, b):
    if abs(a - b) > 1e-6:
        assert overlap(a, b).magnitude < 1.0
    assert overlap(a, a).magnitude == 1.0


def test_overlap_rejects_nonfinite():
    with pytest.raises(ValueError):
        overlap(float("nan"), 0)


def test_helstrom_limits():
    assert helstrom_error(0.0) == 0.0
    assert helstrom_error(1.0) == 0.5


def test_helstrom_high_signal_matches_asymptote():
    S = 7
    p = helstrom_error(math.exp(-2 * S))
    assert p == pytest.approx(1.73e-13, rel=3e-3)
    assert p / (0.25 * math.exp(-4 * S)) == pytest.approx(1.0, rel=1e-2)


def test_helstrom_ratio_tends_to_one():
    ratios = [helstrom_error(math.exp(-2 * s)) / (0.25 * math.exp(-4 * s)) for s in (1, 3, 5, 10, 20)]
    assert all(b <= a + 1e-15 for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(1.0, abs=1e-15)


def test_helstrom_reference_form():
    for g in np.linspace(0, 1, 11):
        for p0 in (0.1, 0.5, 0.8):
            ref = 0.5 * (1 - math.sqrt(1 - 4 * p0 * (1 - p0) * g * g))
            assert helstrom_error(g, p0, 1 - p0) == pytest.approx(ref, abs=1e-15)


def test_helstrom_prior_validation():
    with pytest.raises(ValueError):
        helstrom_error(0.5, 0.6, 0.6)
    helstrom_error(0.5, 0.5, 0.5 + 5e-13)


@given(st.floats(0, 1), st.floats(0, 1))
def test_helstrom_monotone(g1, g2):
    lo, hi = sorted((g1, g2))
    assert helstrom_error(lo) <= helstrom_error(hi)


@given(st.floats(0, 1), st.floats(0, 1))
def test_helstrom_bounded_by_smaller_prior(g, p0):
    assert 0.0 <= helstrom_error(g, p0, 1 - p0) <= min(p0, 1 - p0) + 1e-16


def test_gram_identical_states():
    g = np.asarray(gram_matrix([[0.3 + 0.1j], [0.3 + 0.1j]]))
    np.testing.assert_allclose(g, np.ones((2, 2)), atol=1e-15)


def test_gram_dimension_mismatch():
    with pytest.raises(ValueError):
        gram_matrix([[1, 2], [1]])


def _hamming_states(S=0.5, eta=0.5):
    words = codewords(HAMMING_7_4)
    a = math.sqrt((1 - eta) * S)
    return words, np.where(words == 0, a, -a)


def test_gram_hamming_code():
    words, states = _hamming_states()
    g = np.asarray(gram_matrix(states))
    eps = math.exp(-0.5)
    dist = (words[:, None, :] != words[None, :, :]).sum(-1)
    np.testing.assert_allclose(np.abs(g), eps**dist, atol=1e-12, rtol=0)
    assert pairwise_bound(gram_matrix(states)) == pytest.approx(eps**3, abs=1e-12)
    assert eps**3 == pytest.approx(0.22313, abs=1e-5)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_gram_hermitian_psd(n_states, modes, seed):
    rng = np.random.default_rng(seed)
    states = rng.normal(size=(n_states, modes)) + 1j * rng.normal(size=(n_states, modes))
    g = np.asarray(gram_matrix(states))
    np.testing.assert_allclose(g, g.conj().T, atol=1e-14)
    np.testing.assert_allclose(np.diag(g), 1.0)
    assert np.linalg.eigvalsh(0.5 * (g + g.conj().T)).min() >= -1e-10


def test_gram_log_domain_survives_underflow():
    a = 30.0  # overlap exp(-1800) underflows as a plain number
    g = gram_matrix([[a] * 4, [-a] * 4])
    assert g.log_magnitude[0, 1] == pytest.approx(-2 * a * a * 4)
    assert pairwise_bound(g) == 0.0


def test_pgm_two_states_equals_helstrom():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        g = gram_matrix([[a], [b]])
        gamma = overlap(a, b).magnitude
        assert pgm_error(g) == pytest.approx(helstrom_error(gamma), abs=1e-10)


def test_pgm_identity_and_all_ones():
    assert pgm_error(np.eye(5)) == pytest.approx(0.0, abs=1e-15)
    assert pgm_error(np.ones((4, 4))) == 0.75


def test_pgm_priors_and_validation():
    assert pgm_error(np.ones((2, 2)), [0.9, 0.1]) == pytest.approx(0.18)
    with pytest.raises(ValueError):
        pgm_error(np.eye(2), [0.5, 0.6])
    with pytest.raises(ValueError):
        pgm_error(np.array([[1, 2], [2, 1]]))


def test_pgm_error_clamped():
    words, states = _hamming_states(S=1e-12)
    e = pgm_error(gram_matrix(states))
    assert 0 <= e <= 1 - 1 / 16 + 1e-10


def test_pairwise_bound_identity_and_repetition():
    assert pairwise_bound(np.eye(3)) == 0.0
    _, states = _hamming_states()
    once = pairwise_bound(gram_matrix(states))
    twice = pairwise_bound(gram_matrix(np.repeat(states, 2, axis=1)))
    assert twice == pytest.approx(once**2, rel=1e-12)
    with pytest.raises(ValueError):
        pairwise_bound(np.eye(1))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_appending_modes_never_increases_bound(n_states, modes, seed):
    rng = np.random.default_rng(seed)
    states = rng.normal(size=(n_states, modes)) + 1j * rng.normal(size=(n_states, modes))
    bounds = [pairwise_bound(g) for g in gram_prefixes(states, range(modes + 1))]
    assert all(b <= a + 1e-12 for a, b in zip(bounds, bounds[1:]))
    assert bounds[0] == 1.0
