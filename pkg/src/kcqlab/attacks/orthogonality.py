"""Pairwise overlap and square-root-measurement error of keyed ciphertext states.

Two settings share this machinery: the ``2**|K|`` ciphertext product states of
an alpha-eta instance for one fixed plaintext, and Eve's tapped codeword states
in the coherent-state BB84 beamsplitter attack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..cipher import AlphaEtaParams, key_basis_table, map_to_state
from ..coherent import gram_matrix, gram_prefixes, pairwise_bound, pgm_error
from ..entropy import BudgetExceeded

MAX_KEY_BITS = 10
MAX_CODEWORDS = 2**12

HAMMING_7_4 = np.array(
    [
        [1, 0, 0, 0, 1, 1, 0],
        [0, 1, 0, 0, 1, 0, 1],
        [0, 0, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.int64,
)


@dataclass(frozen=True)
class CurvePoint:
    n: int
    epsilon: float
    error: float


@dataclass(frozen=True)
class OrthogonalityCurve:
    key_bits: int
    M: int
    S: float
    points: list[CurvePoint]

    @property
    def lengths(self) -> list[int]:
        return [p.n for p in self.points]

    @property
    def epsilon(self) -> np.ndarray:
        return np.array([p.epsilon for p in self.points])

    @property
    def error(self) -> np.ndarray:
        return np.array([p.error for p in self.points])


def ciphertext_states(key_bits: int, M: int, S: float, plaintext, taps: int | None = None) -> np.ndarray:
    """Amplitudes ``(2**|K|, n)`` of every key's ciphertext for a fixed plaintext bit string."""
    params = AlphaEtaParams(M, S)
    bits = np.asarray(plaintext, dtype=np.int64)
    bases = key_basis_table(key_bits, M, bits.size, taps)
    m = map_to_state(bases, bits[None, :], M) if bits.size else np.zeros((1 << key_bits, 0), np.int64)
    return params.alpha0 * np.exp(1j * params.angle(m))


def orthogonality_curve(key_bits: int, M: int, S: float, plaintext, lengths, taps: int | None = None) -> OrthogonalityCurve:
    """``epsilon(n)`` (largest cross-key overlap) and PGM key error ``P_E(n)`` for prefixes of the plaintext.

    Args:
        plaintext: known bit string; its length bounds the grid.
        lengths: ascending prefix lengths, ``0`` allowed.
    """
    if not 1 <= key_bits <= MAX_KEY_BITS:
        raise BudgetExceeded("orthogonality curve key space", 1 << key_bits, 1 << MAX_KEY_BITS)
    lengths = sorted(int(n) for n in lengths)
    states = ciphertext_states(key_bits, M, S, plaintext, taps)
    points = [
        CurvePoint(n, pairwise_bound(g), pgm_error(g))
        for n, g in zip(lengths, gram_prefixes(states, lengths))
    ]
    return OrthogonalityCurve(key_bits, M, float(S), points)


def codewords(generator) -> np.ndarray:
    """All ``2**k`` codewords of the binary linear code spanned by ``generator`` rows."""
    g = np.asarray(generator, dtype=np.int64) % 2
    k = g.shape[0]
    messages = np.array(list(product((0, 1), repeat=k)), dtype=np.int64).reshape(-1, k)
    return messages @ g % 2


def minimum_distance(words: np.ndarray) -> int:
    weights = words.sum(axis=1)
    nonzero = weights[weights > 0]
    if nonzero.size == 0:
        raise ValueError("code has no nonzero codeword")
    return int(nonzero.min())


@dataclass(frozen=True)
class Bb84AttackConfig:
    """Eve taps ``1 - eta`` of each antipodal qumode of a codeword of the given linear code.

    ``repetition`` concatenates each codeword with itself that many times.
    """

    generator: np.ndarray = field(default_factory=lambda: HAMMING_7_4.copy())
    S: float = 0.5
    eta: float = 0.5
    delta: float = 0.1
    repetition: int = 1

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=np.int64)
        if g.ndim != 2 or not np.isin(g, (0, 1)).all():
            raise ValueError("generator must be a binary k x n matrix")
        object.__setattr__(self, "generator", g)
        if 1 << g.shape[0] > MAX_CODEWORDS:
            raise BudgetExceeded("BB84 codeword count", 1 << g.shape[0], MAX_CODEWORDS)
        if not self.S > 0:
            raise ValueError(f"photon number must be positive, got {self.S}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if self.repetition < 1:
            raise ValueError("repetition must be >= 1")
        n, d = self.block_length, self.distance
        if not d > 2 * self.delta * n:
            raise ValueError(f"code violates d > 2 delta n: d={d}, 2*delta*n={2 * self.delta * n}")

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def block_length(self) -> int:
        return self.generator.shape[1] * self.repetition

    @property
    def distance(self) -> int:
        return minimum_distance(self.codewords())

    def codewords(self) -> np.ndarray:
        return np.tile(codewords(self.generator), (1, self.repetition))


@dataclass(frozen=True)
class Bb84AttackReport:
    epsilon: float
    distance: int
    epsilon_d: float
    pairwise_bound: float
    error: float
    blind_guess: float
    hamming: np.ndarray
    gram: np.ndarray

    @property
    def max_entry_deviation(self) -> float:
        """Largest ``| |G_ij| - epsilon**d_H(i, j) |``."""
        return float(np.max(np.abs(np.abs(self.gram) - self.epsilon ** self.hamming)))


def bb84_attack(config: Bb84AttackConfig) -> Bb84AttackReport:
    """Gram matrix, overlap bound and PGM error of Eve's tapped codeword states."""
    words = config.codewords()
    amp = math.sqrt((1 - config.eta) * config.S)
    states = np.where(words == 0, amp, -amp).astype(complex)
    g = gram_matrix(states)
    eps = math.exp(-2 * (1 - config.eta) * config.S)
    d = config.distance
    hamming = (words[:, None, :] != words[None, :, :]).sum(axis=2)
    return Bb84AttackReport(
        epsilon=eps,
        distance=d,
        epsilon_d=eps**d,
        pairwise_bound=pairwise_bound(g),
        error=pgm_error(g),
        blind_guess=1 - 2.0 ** -config.k,
        hamming=hamming,
        gram=g.entries,
    )
