"""Exact entropies of small ciphers: Shannon limit, distances, propositions, homophonic coding.

All entropies are in bits. The key prior is always uniform; the plaintext prior
is a parameter (uniform, iid biased, or an arbitrary block distribution).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cipher import CipherModel, build_cipher_model

ZERO = 1e-9
TABLE_BUDGET = 10**7


class BudgetExceeded(ValueError):
    """Raised when an enumeration would exceed the table budget."""

    def __init__(self, what: str, required: int, budget: int):
        super().__init__(f"{what} needs {required} entries, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class JointTable:
    """Sparse joint distribution over (key, plaintext block, ciphertext block).

    Blocks are encoded as base-``A`` / base-``C`` integers, position 0 most significant.
    Only entries of positive probability are stored.
    """

    n: int
    n_keys: int
    plaintext_size: int
    ciphertext_size: int
    key: np.ndarray
    x: np.ndarray
    y: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        if np.any(self.prob < 0) or abs(float(self.prob.sum()) - 1.0) > 1e-12:
            raise ValueError("joint probabilities must be nonnegative and sum to 1")
        for arr in (self.key, self.x, self.y, self.prob):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.prob.size

    def dense(self) -> np.ndarray:
        """Dense ``(keys, A**n, C**n)`` array; only for small tables."""
        out = np.zeros((self.n_keys, self.plaintext_size**self.n, self.ciphertext_size**self.n))
        np.add.at(out, (self.key, self.x, self.y), self.prob)
        return out


def _plaintext_weights(dist, alphabet: int, n: int):
    """Return (iid per-symbol vector or None, block vector or None)."""
    if dist is None:
        return np.full(alphabet, 1.0 / alphabet), None
    d = np.asarray(dist, dtype=float)
    if d.ndim != 1 or np.any(d < 0) or abs(d.sum() - 1.0) > 1e-12:
        raise ValueError("plaintext distribution must be a probability vector")
    if d.size == alphabet:
        return d, None
    if d.size == alphabet**n:
        return None, d
    raise ValueError(f"plaintext distribution has {d.size} entries, expected {alphabet} or {alphabet ** n}")


def table_size(cipher: CipherModel, n: int) -> int:
    return cipher.n_keys * cipher.plaintext_size**n * cipher.randomization**n


def enumerate_joint(cipher: CipherModel, plaintext_dist=None, n: int = 1, budget: int = TABLE_BUDGET) -> JointTable:
    """Exact ``p(k, x_n, y_n)`` with a uniform key prior."""
    if n < 0:
        raise ValueError(f"block length must be nonnegative, got {n}")
    required = table_size(cipher, n)
    if required > budget:
        raise BudgetExceeded(f"{cipher.kind} table at n={n}", required, budget)
    A, C, K = cipher.plaintext_size, cipher.ciphertext_size, cipher.n_keys
    if K * A**n * C**n >= 2**62:
        raise BudgetExceeded(f"{cipher.kind} block index at n={n}", K * A**n * C**n, 2**62)
    iid, block = _plaintext_weights(plaintext_dist, A, n)
    key = np.arange(K, dtype=np.int64)
    x = np.zeros(K, dtype=np.int64)
    y = np.zeros(K, dtype=np.int64)
    prob = np.full(K, 1.0 / K)
    for i in range(n):
        w = cipher.position_table(i)[key]  # (entries, A, C)
        if iid is not None:
            w = w * iid[None, :, None]
        e, a, c = np.nonzero(w)
        prob = prob[e] * w[e, a, c]
        key = key[e]
        x = x[e] * A + a
        y = y[e] * C + c
    if block is not None:
        prob = prob * block[x]
        keep = prob > 0
        key, x, y, prob = key[keep], x[keep], y[keep], prob[keep]
    return JointTable(n, K, A, C, key, x, y, prob)


def _groups(ids: np.ndarray, prob: np.ndarray):
    uniq, inv = np.unique(ids, return_inverse=True)
    return inv, np.bincount(inv, weights=prob, minlength=uniq.size)


def conditional_entropy(prob: np.ndarray, joint_ids: np.ndarray, cond_ids: np.ndarray | None) -> float:
    """``-sum p(a,b) log2 p(a|b)`` where ``joint_ids`` label (a,b) and ``cond_ids`` label b."""
    jinv, pj = _groups(joint_ids, prob)
    if cond_ids is None:
        mask = pj > 0
        return max(0.0, float(-(pj[mask] * np.log2(pj[mask])).sum()))
    cinv, pc = _groups(cond_ids, prob)
    cond_of_joint = np.empty(pj.size, dtype=np.int64)
    cond_of_joint[jinv] = cinv
    mask = pj > 0
    return max(0.0, float(-(pj[mask] * np.log2(pj[mask] / pc[cond_of_joint[mask]])).sum()))


@dataclass(frozen=True)
class EntropyReport:
    n: int
    H_K: float
    H_X: float
    H_X_given_Y: float
    H_K_given_Y: float
    H_K_given_X: float
    H_K_given_XY: float
    H_Y_given_X: float
    H_Y_given_KX: float
    H_X_given_KY: float

    @property
    def nonrandom(self) -> bool:
        return self.H_Y_given_KX < ZERO

    @property
    def decryptable(self) -> bool:
        return self.H_X_given_KY < ZERO

    @property
    def perfectly_secure(self) -> bool:
        return abs(self.H_X_given_Y - self.H_X) < ZERO

    @property
    def shannon_slack(self) -> float:
        """``H(K) - H(X|Y)``; nonnegative for any standard cipher."""
        return self.H_K - self.H_X_given_Y

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(nonrandom=self.nonrandom, decryptable=self.decryptable, perfectly_secure=self.perfectly_secure)
        return d


def entropy_report(t: JointTable) -> EntropyReport:
    Cn = t.ciphertext_size**t.n
    An = t.plaintext_size**t.n
    k, x, y, p = t.key, t.x, t.y, t.prob
    kx = k * An + x
    ky = k * Cn + y
    xy = x * Cn + y
    kxy = kx * Cn + y
    H = conditional_entropy
    return EntropyReport(
        n=t.n,
        H_K=H(p, k, None),
        H_X=H(p, x, None),
        H_X_given_Y=H(p, xy, y),
        H_K_given_Y=H(p, ky, y),
        H_K_given_X=H(p, kx, x),
        H_K_given_XY=H(p, kxy, xy),
        H_Y_given_X=H(p, xy, x),
        H_Y_given_KX=H(p, kxy, kx),
        H_X_given_KY=H(p, kxy, ky),
    )


def verify_identities(t: JointTable | EntropyReport) -> tuple[float, float]:
    """Chain-rule residuals ``H(Y|X)+H(K|XY)-H(K|X)-H(Y|KX)`` and ``H(X|Y)+H(K|XY)-H(K|Y)-H(X|KY)``."""
    r = t if isinstance(t, EntropyReport) else entropy_report(t)
    a1 = r.H_Y_given_X + r.H_K_given_XY - r.H_K_given_X - r.H_Y_given_KX
    a2 = r.H_X_given_Y + r.H_K_given_XY - r.H_K_given_Y - r.H_X_given_KY
    return abs(a1), abs(a2)


def trajectory(cipher: CipherModel, n_max: int, plaintext_dist=None, start: int = 1):
    """Yield entropy reports for ``n = start .. n_max``."""
    for n in range(start, n_max + 1):
        yield entropy_report(enumerate_joint(cipher, plaintext_dist, n))


def nondegeneracy_distance(cipher: CipherModel, n_max: int) -> int | None:
    """Smallest ``n`` with ``H(Y_n|X_n) = H(K)`` under uniform plaintext, or ``None``."""
    for r in trajectory(cipher, n_max):
        if abs(r.H_Y_given_X - r.H_K) < ZERO:
            return r.n
    return None


@dataclass(frozen=True)
class UnicityResult:
    n1: int | None
    infimum: float
    key_entropy: list[float] = field(default_factory=list)


def unicity_distance_kpa(cipher: CipherModel, n_max: int) -> UnicityResult:
    """Smallest ``n`` with ``H(K|X_n Y_n) = 0`` (uniform plaintext prior) and the searched infimum."""
    values = []
    for r in trajectory(cipher, n_max):
        values.append(r.H_K_given_XY)
        if r.H_K_given_XY < ZERO:
            return UnicityResult(r.n, r.H_K_given_XY, values)
    return UnicityResult(None, min(values) if values else math.log2(cipher.n_keys), values)


@dataclass(frozen=True)
class DistanceReport:
    n_d: int | None
    n_1: int | None
    n_max: int
    H_Y_given_X: list[float]
    H_K_given_XY: list[float]


def distance_report(cipher: CipherModel, n_max: int) -> DistanceReport:
    """Both distances from one sweep, with the full trajectories up to ``n_max``."""
    reports = list(trajectory(cipher, n_max))
    n_d = next((r.n for r in reports if abs(r.H_Y_given_X - r.H_K) < ZERO), None)
    n_1 = next((r.n for r in reports if r.H_K_given_XY < ZERO), None)
    return DistanceReport(n_d, n_1, n_max, [r.H_Y_given_X for r in reports], [r.H_K_given_XY for r in reports])


@dataclass(frozen=True)
class PropositionA:
    n_d: int | None
    n_1: int | None

    @property
    def holds(self) -> bool:
        return self.n_d is None or self.n_1 is None or self.n_d == self.n_1


def proposition_a_check(cipher: CipherModel, n_max: int) -> PropositionA:
    """For a nonrandom cipher the known-plaintext unicity distance equals ``n_d``."""
    if not cipher.is_nonrandom:
        raise ValueError("proposition A applies to nonrandom ciphers only")
    d = distance_report(cipher, n_max)
    result = PropositionA(d.n_d, d.n_1)
    if d.n_d is not None and d.n_1 is not None and not result.holds:
        raise AssertionError(f"n_1={d.n_1} differs from n_d={d.n_d}")
    return result


def random_nondegenerate_cipher(
    rng: np.random.Generator, key_bits: int, alphabet: int, n_max: int, length: int = 8, max_tries: int = 200
) -> tuple[CipherModel, int]:
    """Draw random permutation tables until one has ``n_d <= n_max``; returns (cipher, n_d)."""
    for _ in range(max_tries):
        c = build_cipher_model("random-table", key_bits=key_bits, alphabet=alphabet, length=length, rng=rng)
        n_d = nondegeneracy_distance(c, n_max)
        if n_d is not None:
            return c, n_d
    raise RuntimeError(f"no nondegenerate cipher found in {max_tries} draws")


# --------------------------------------------------------------------------- homophonic substitution


def _dyadic(p) -> Fraction:
    f = Fraction(p) if isinstance(p, (Fraction, int, str)) else Fraction(float(p)).limit_denominator(1 << 24)
    if isinstance(p, float) and abs(float(f) - p) > 1e-15:
        raise ValueError(f"probability {p!r} is not a dyadic rational")
    if f < 0 or f.denominator & (f.denominator - 1):
        raise ValueError(f"probability {p!r} is not a dyadic rational")
    return f


@dataclass(frozen=True)
class HomophonicCode:
    """Fixed-length homophonic substitution for a dyadic source.

    With every probability written as ``c_i / 2**L``, symbol ``i`` owns ``c_i``
    consecutive ``L``-bit codewords; encoding picks one uniformly, so codewords
    (and their bits) come out uniform and iid.
    """

    probabilities: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(_dyadic(p) for p in self.probabilities)
        if sum(probs) != 1:
            raise ValueError(f"source probabilities must sum to exactly 1, got {float(sum(probs))}")
        object.__setattr__(self, "probabilities", probs)

    @property
    def bits(self) -> int:
        return max(1, max(p.denominator for p in self.probabilities).bit_length() - 1)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(int(p * (1 << self.bits)) for p in self.probabilities)

    @property
    def starts(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.counts)[:-1]]).astype(np.int64)

    @property
    def owner(self) -> np.ndarray:
        """Source symbol owning each codeword."""
        return np.repeat(np.arange(len(self.counts)), self.counts)

    def encode(self, symbols, rng: np.random.Generator) -> np.ndarray:
        s = np.asarray(symbols, dtype=np.int64)
        counts = np.asarray(self.counts)
        if np.any(s < 0) or np.any(s >= counts.size) or np.any(counts[s] == 0):
            raise ValueError("symbol outside the source alphabet")
        return self.starts[s] + (rng.random(s.shape) * counts[s]).astype(np.int64)

    def decode(self, codewords) -> np.ndarray:
        return self.owner[np.asarray(codewords, dtype=np.int64)]

    def codeword_distribution(self) -> np.ndarray:
        """Exact output distribution over codewords: ``p(owner) / count(owner)``."""
        probs = np.array([float(p) for p in self.probabilities])
        counts = np.asarray(self.counts, dtype=float)
        owner = self.owner
        return probs[owner] / counts[owner]


def to_bits(codewords, width: int) -> np.ndarray:
    """``(..., n)`` codewords to ``(..., n*width)`` bits, MSB first."""
    c = np.atleast_1d(np.asarray(codewords, dtype=np.int64))
    shifts = np.arange(width - 1, -1, -1)
    return ((c[..., None] >> shifts) & 1).reshape(c.shape[:-1] + (c.shape[-1] * width,))


def from_bits(bits, width: int) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64)
    b = b.reshape(b.shape[:-1] + (-1, width))
    return b @ (1 << np.arange(width - 1, -1, -1))


def homophonic_encode(source_probs, plaintext, rng: np.random.Generator) -> np.ndarray:
    """Expand a source block into uniform iid bits (``L`` bits per symbol, MSB first)."""
    code = HomophonicCode(tuple(source_probs))
    return to_bits(code.encode(plaintext, rng), code.bits)


def homophonic_decode(source_probs, bits) -> np.ndarray:
    code = HomophonicCode(tuple(source_probs))
    return code.decode(from_bits(bits, code.bits))


def _block_distribution(symbol_dist: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(n):
        out = np.outer(out, symbol_dist).ravel()
    return out


@dataclass(frozen=True)
class PropositionB:
    key_entropy: float
    protected: float
    unprotected: float

    @property
    def holds(self) -> bool:
        return abs(self.protected - self.key_entropy) < ZERO


def proposition_b_check(cipher: CipherModel, source_probs, n: int) -> PropositionB:
    """``H(K|Y)`` for ``n`` biased iid source symbols, with and without homophonic pre-coding.

    A binary cipher receives the ``n*L`` expanded bits; a cipher over ``2**L`` symbols
    receives the ``n`` codewords directly.
    """
    code = HomophonicCode(tuple(source_probs))
    probs = np.array([float(p) for p in code.probabilities])
    if probs.size != cipher.plaintext_size:
        raise ValueError(f"source alphabet {probs.size} differs from cipher alphabet {cipher.plaintext_size}")
    plain = entropy_report(enumerate_joint(cipher, probs, n))
    words = _block_distribution(code.codeword_distribution(), n)  # over n-codeword blocks
    L = code.bits
    if cipher.plaintext_size == 2:
        # block index over n*L bits equals the concatenated codeword index
        protected = entropy_report(enumerate_joint(cipher, words, n * L))
    elif cipher.plaintext_size == 1 << L:
        protected = entropy_report(enumerate_joint(cipher, words, n))
    else:
        raise ValueError("homophonic output does not fit the cipher alphabet")
    return PropositionB(plain.H_K, protected.H_K_given_Y, plain.H_K_given_Y)


# --------------------------------------------------------------------------- profiles and fresh key


@dataclass(frozen=True)
class SecurityProfile:
    lambda1: float
    lambda2: float
    n_max: int


def security_profile(cipher: CipherModel, n_max: int, plaintext_dist=None) -> SecurityProfile:
    """Normalized infima of ``H(X_n|Y_n)`` and ``H(K|X_nY_n)`` over ``n = 1..n_max``."""
    reports = list(trajectory(cipher, n_max, plaintext_dist))
    hk = reports[0].H_K
    lam1 = min(r.H_X_given_Y for r in reports) / hk
    lam2 = min(r.H_K_given_XY for r in reports) / hk
    if all(r.decryptable for r in reports) and lam1 + lam2 > 1 + ZERO:
        raise AssertionError(f"lambda1 + lambda2 = {lam1 + lam2} exceeds 1 for a decryptable cipher")
    return SecurityProfile(lam1, lam2, n_max)


@dataclass(frozen=True)
class FreshKeyVerdict:
    n: int
    H_X_given_KY: float

    @property
    def per_symbol(self) -> float:
        return self.H_X_given_KY / self.n if self.n else 0.0

    @property
    def fresh_key_possible(self) -> bool:
        return self.H_X_given_KY >= ZERO

    @property
    def verdict(self) -> str:
        return "fresh key possible in principle" if self.fresh_key_possible else "no fresh key"


def fresh_key_check(t: JointTable) -> FreshKeyVerdict:
    """Whether the plaintext keeps any uncertainty once key and ciphertext are known."""
    return FreshKeyVerdict(t.n, entropy_report(t).H_X_given_KY)
