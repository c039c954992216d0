import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcqlab.cipher import build_cipher_model
from kcqlab.entropy import (
    BudgetExceeded,
    HomophonicCode,
    distance_report,
    enumerate_joint,
    entropy_report,
    fresh_key_check,
    homophonic_decode,
    homophonic_encode,
    nondegeneracy_distance,
    proposition_a_check,
    proposition_b_check,
    random_nondegenerate_cipher,
    security_profile,
    trajectory,
    unicity_distance_kpa,
    verify_identities,
)


def brute_entropy(joint: dict, target, given_=None) -> float:
    """H(target | given) from a dict of outcome tuples -> probability."""
    def marg(fn):
        out = {}
        for o, p in joint.items():
            out[fn(o)] = out.get(fn(o), 0.0) + p
        return out

    both = marg(lambda o: (target(o), given_(o) if given_ else ()))
    cond = marg(lambda o: given_(o) if given_ else ())
    return -sum(p * math.log2(p / cond[k[1]]) for k, p in both.items() if p > 0)


def test_otp_single_bit_table():
    t = enumerate_joint(build_cipher_model("one-time-pad", key_bits=1), None, 1)
    assert len(t) == 4  # 2 keys x 2 plaintexts, one ciphertext each
    np.testing.assert_allclose(t.prob, 0.25)
    assert t.dense().shape == (2, 2, 2)
    assert t.dense().size == 8


def test_lfsr_table_sums_to_one():
    t = enumerate_joint(build_cipher_model("lfsr-xor", key_bits=2), None, 3)
    assert t.prob.sum() == 1.0


def test_otp_flattens_biased_source():
    t = enumerate_joint(build_cipher_model("one-time-pad", key_bits=1), [0.75, 0.25], 1)
    p_y0 = t.prob[t.y == 0].sum()
    assert p_y0 == pytest.approx(0.5, abs=1e-15)


def test_budget_exceeded_reports_size():
    c = build_cipher_model("lfsr-xor", key_bits=3, length=30)
    with pytest.raises(BudgetExceeded) as e:
        enumerate_joint(c, None, 22)
    assert e.value.required == 8 * 2**22


def test_plaintext_distribution_validation():
    c = build_cipher_model("one-time-pad", key_bits=1)
    with pytest.raises(ValueError):
        enumerate_joint(c, [0.5, 0.6], 1)
    with pytest.raises(ValueError):
        enumerate_joint(c, [0.2, 0.3, 0.5], 1)
    block = enumerate_joint(c, [0.1, 0.2, 0.3, 0.4], 2)
    assert block.prob.sum() == pytest.approx(1.0)


def test_otp_perfect_security():
    r = entropy_report(enumerate_joint(build_cipher_model("one-time-pad", key_bits=2), None, 2))
    assert r.H_X_given_Y == pytest.approx(2.0) and r.H_K == pytest.approx(2.0)
    assert r.perfectly_secure and r.nonrandom and r.decryptable


def test_lfsr_nonrandom_n5():
    r = entropy_report(enumerate_joint(build_cipher_model("lfsr-xor", key_bits=3), None, 5))
    assert r.H_Y_given_KX < 1e-9 and r.nonrandom


def test_entropies_match_brute_force():
    rng = np.random.default_rng(0)
    c = build_cipher_model("random-table", key_bits=2, alphabet=3, randomization=2, rng=rng)
    t = enumerate_joint(c, [0.5, 0.3, 0.2], 2)
    joint = {(int(k), int(x), int(y)): float(p) for k, x, y, p in zip(t.key, t.x, t.y, t.prob)}
    r = entropy_report(t)
    K, X, Y = (lambda o: o[0]), (lambda o: o[1]), (lambda o: o[2])
    assert r.H_K == pytest.approx(brute_entropy(joint, K), abs=1e-12)
    assert r.H_X_given_Y == pytest.approx(brute_entropy(joint, X, Y), abs=1e-12)
    assert r.H_K_given_XY == pytest.approx(brute_entropy(joint, K, lambda o: (o[1], o[2])), abs=1e-12)
    assert r.H_Y_given_KX == pytest.approx(brute_entropy(joint, Y, lambda o: (o[0], o[1])), abs=1e-12)
    assert r.H_X_given_KY == pytest.approx(brute_entropy(joint, X, lambda o: (o[0], o[2])), abs=1e-12)


def _random_instance(seed: int):
    rng = np.random.default_rng(seed)
    kind = rng.choice(["one-time-pad", "lfsr-xor", "random-table", "alpha-eta-discretized"])
    key_bits = int(rng.integers(1, 4))
    n = int(rng.integers(1, 6))
    if kind == "random-table":
        alphabet = int(rng.integers(2, 5))
        rand = int(rng.integers(1, 3))
        c = build_cipher_model(kind, key_bits=key_bits, alphabet=alphabet, randomization=rand, rng=rng,
                               redundant=bool(rng.integers(2)) and key_bits > 1)
        n = min(n, 3)
    elif kind == "alpha-eta-discretized":
        key_bits = max(key_bits, 2)
        c = build_cipher_model(kind, key_bits=key_bits, M=4, photons=float(rng.uniform(0.1, 3)), length=5)
        n = min(n, 3)
    elif kind == "lfsr-xor":
        key_bits = max(key_bits, 2)
        c = build_cipher_model(kind, key_bits=key_bits)
    else:
        c = build_cipher_model(kind, key_bits=key_bits)
    dist = rng.dirichlet(np.ones(c.plaintext_size)) if rng.integers(2) else None
    return c, dist, n


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_identities_and_chains(seed):
    c, dist, n = _random_instance(seed)
    r = entropy_report(enumerate_joint(c, dist, n))
    assert max(verify_identities(r)) < 1e-9
    assert r.H_K_given_XY <= r.H_K_given_Y + 1e-9 <= r.H_K + 2e-9
    assert min(r.as_dict()[k] for k in r.__dataclass_fields__ if k.startswith("H_")) >= 0
    if r.decryptable:
        assert r.H_X_given_Y <= r.H_K + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_key_equivocation_nonincreasing_in_n(seed):
    c, _, _ = _random_instance(seed)
    values = [r.H_K_given_XY for r in trajectory(c, 3)]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


def test_distances_otp():
    d = distance_report(build_cipher_model("one-time-pad", key_bits=2), 4)
    assert (d.n_d, d.n_1) == (2, 2)


def test_distances_lfsr_k3():
    c = build_cipher_model("lfsr-xor", key_bits=3)
    assert nondegeneracy_distance(c, 6) == 3
    u = unicity_distance_kpa(c, 6)
    assert u.n1 == 3 and u.infimum < 1e-9
    a = proposition_a_check(c, 6)
    assert (a.n_d, a.n_1) == (3, 3) and a.holds


def test_distances_lfsr_k3_exhaustive_prefixes():
    c = build_cipher_model("lfsr-xor", key_bits=3)
    prefixes = {tuple(int(np.argmax(c.position_table(i)[k, 0])) for i in range(3)) for k in range(8)}
    assert len(prefixes) == 8


def test_redundant_key_use_is_degenerate():
    c = build_cipher_model("random-table", key_bits=2, redundant=True, rng=np.random.default_rng(1))
    assert nondegeneracy_distance(c, 5) is None
    assert all(r.H_Y_given_X <= r.H_K - 1 + 1e-9 for r in trajectory(c, 5))


def test_alpha_eta_retains_key_entropy():
    c = build_cipher_model("alpha-eta-discretized", key_bits=2, M=4, photons=0.25, length=6)
    u = unicity_distance_kpa(c, 6)
    assert u.n1 is None and u.infimum > 0.1


def test_proposition_a_rejects_random_cipher():
    c = build_cipher_model("alpha-eta-discretized", key_bits=2, M=4, photons=0.5, length=2)
    with pytest.raises(ValueError):
        proposition_a_check(c, 2)


@pytest.mark.parametrize("seed", range(10))
def test_proposition_a_random_instances(seed):
    rng = np.random.default_rng(seed)
    c, n_d = random_nondegenerate_cipher(rng, int(rng.integers(1, 4)), int(rng.integers(2, 5)), 6)
    a = proposition_a_check(c, 6)
    assert a.n_d == n_d and a.n_1 == n_d


def test_homophonic_code_three_quarters():
    code = HomophonicCode((Fraction(3, 4), Fraction(1, 4)))
    assert code.bits == 2 and code.counts == (3, 1)
    assert code.owner.tolist() == [0, 0, 0, 1]
    np.testing.assert_allclose(code.codeword_distribution(), 0.25)


def test_homophonic_uniform_is_identity():
    code = HomophonicCode((0.5, 0.5))
    assert code.bits == 1
    x = np.array([0, 1, 1, 0])
    np.testing.assert_array_equal(homophonic_encode((0.5, 0.5), x, np.random.default_rng(0)), x)


def test_homophonic_round_trip_and_uniformity():
    rng = np.random.default_rng(3)
    probs = (0.75, 0.25)
    x = rng.choice(2, p=probs, size=(10**5, 4))
    bits = homophonic_encode(probs, x, rng)
    assert bits.shape == (10**5, 8)
    np.testing.assert_array_equal(homophonic_decode(probs, bits), x)
    assert abs(bits.mean() - 0.5) < 4 * math.sqrt(0.25 / bits.size)


def test_homophonic_rejects_non_dyadic():
    with pytest.raises(ValueError):
        HomophonicCode((1 / 3, 2 / 3))
    with pytest.raises(ValueError):
        HomophonicCode((Fraction(1, 2), Fraction(1, 4)))


def test_proposition_b_lfsr_k2():
    b = proposition_b_check(build_cipher_model("lfsr-xor", key_bits=2), (0.75, 0.25), 4)
    assert abs(b.protected - 2.0) < 1e-9 and b.unprotected < 2.0 - 1e-6 and b.holds


def test_proposition_b_uniform_source():
    b = proposition_b_check(build_cipher_model("lfsr-xor", key_bits=2), (0.5, 0.5), 3)
    assert b.protected == pytest.approx(2.0, abs=1e-9) and b.unprotected == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_proposition_b_random_ciphers(seed):
    rng = np.random.default_rng(100 + seed)
    c, _ = random_nondegenerate_cipher(rng, 2, 2, 4)
    b = proposition_b_check(c, (0.75, 0.25), 2)
    assert abs(b.protected - c.key_entropy) < 1e-9


def test_security_profile_otp():
    p = security_profile(build_cipher_model("one-time-pad", key_bits=2), 1)
    assert (p.lambda1, p.lambda2) == pytest.approx((0.5, 0.5))


def test_security_profile_lfsr_beyond_nd():
    p = security_profile(build_cipher_model("lfsr-xor", key_bits=3), 5)
    assert p.lambda2 == pytest.approx(0.0, abs=1e-12)


def test_security_profile_random_cipher_keeps_key():
    c = build_cipher_model("alpha-eta-discretized", key_bits=2, M=4, photons=0.25, length=6)
    assert security_profile(c, 4).lambda2 > 0


def test_fresh_key_nonrandom_cipher():
    v = fresh_key_check(enumerate_joint(build_cipher_model("lfsr-xor", key_bits=3), None, 4))
    assert v.H_X_given_KY < 1e-9 and v.verdict == "no fresh key"


def _fresh(S, M, n=2):
    c = build_cipher_model("alpha-eta-discretized", key_bits=2, M=M, photons=S, length=n)
    return fresh_key_check(enumerate_joint(c, None, n))


def test_fresh_key_regimes():
    assert _fresh(0.1, 32).per_symbol > 0.5
    assert _fresh(7.0, 4).per_symbol < 0.01


def test_fresh_key_per_symbol_matches_sector_oracle():
    # with the key known, a symbol stays ambiguous only when the sector is off the keyed axis
    from kcqlab.measurement import sector_probabilities

    p = sector_probabilities(4.0, 4)
    on_axis = p[0] + p[2]
    q = p[0] / on_axis
    h2 = -q * math.log2(q) - (1 - q) * math.log2(1 - q)
    expected = on_axis * h2 + p[1] + p[3]  # off-axis sectors are equidistant from both states: one full bit
    assert _fresh(4.0, 4).per_symbol == pytest.approx(expected, abs=1e-9)
