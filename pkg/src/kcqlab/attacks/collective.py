"""Eve heterodynes every qumode and is handed the key afterwards.

With the key, the bit posterior on each qumode depends only on the outcome's
projection ``q`` onto the keyed axis: ``P(+|q) = sigmoid(4 sqrt(S) q)`` under
the variance-1/2 heterodyne convention. Averaging its binary entropy estimates
the per-qumode ``H(X|Y^E, K)``; the spread of the phase sector around the sent
state estimates ``H(Y_sector|K, X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .. import rng as rngmod
from ..cipher import AlphaEtaParams, map_to_state
from ..measurement import HETERODYNE_VAR, discretize, exact_ber, heterodyne_sample, sector_probabilities

MIN_TRIALS = 10**5


def binary_entropy_from_logit(z) -> np.ndarray:
    """``h2(sigmoid(z))`` in bits without cancellation for large ``|z|``."""
    a = np.abs(np.asarray(z, dtype=float))
    tail = np.exp(-a)
    return (np.log1p(tail) + a * tail / (1 + tail)) / math.log(2)


def posterior_entropy_oracle(S: float) -> float:
    """``E[h2(P(+|q))]`` for ``q ~ N(sqrt S, 1/2)`` by quadrature."""
    a = math.sqrt(S)
    sd = math.sqrt(HETERODYNE_VAR)

    def f(q):
        return binary_entropy_from_logit(4 * a * q) * math.exp(-((q - a) ** 2) / (2 * sd * sd)) / (sd * math.sqrt(2 * math.pi))

    val, _ = integrate.quad(f, a - 40 * sd, a + 40 * sd, points=[0.0], limit=400, epsabs=1e-15)
    return float(val)


def sector_entropy(S: float, M: int) -> float:
    p = sector_probabilities(S, M)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class CollectiveAttackReport:
    M: int
    S: float
    trials: int
    errors: int
    posterior_entropy: float
    posterior_entropy_oracle: float
    sector_entropy: float
    sector_entropy_oracle: float

    @property
    def ber(self) -> float:
        return self.errors / self.trials

    @property
    def ber_reference(self) -> float:
        return exact_ber("heterodyne", self.S)

    @property
    def ber_sigma(self) -> float:
        p = self.ber_reference
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def random_cipher(self) -> bool:
        """Whether the discretized outcome is a random function of key and plaintext."""
        return self.sector_entropy_oracle > 1e-9


def heterodyne_collective_attack(M: int, S: float, trials: int = MIN_TRIALS, master_seed: int = 0) -> CollectiveAttackReport:
    """Monte Carlo of the keyed-posterior heterodyne attack.

    Bases and plaintext bits are drawn uniformly per qumode; the key is granted
    after measurement, so only the keyed basis of each qumode is used.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"collective attack needs at least {MIN_TRIALS} trials, got {trials}")
    params = AlphaEtaParams(M, S)
    a = params.alpha0

    def draw(g: np.random.Generator, size: int) -> np.ndarray:
        l = g.integers(0, M // 2, size=size)
        b = g.integers(0, 2, size=size)
        m = map_to_state(l, b, M)
        y = heterodyne_sample(a * np.exp(1j * params.angle(m)), g)
        q = np.real(y * np.exp(-1j * params.angle(l)))
        sign = np.where(b == (l & 1), 1.0, -1.0)  # +1 when the sent state sits on the axis
        err = (np.sign(q) * sign) < 0
        h = binary_entropy_from_logit(4 * a * q)
        offset = (discretize(y, M) - m) % M
        return np.stack([err.astype(float), h, offset.astype(float)])

    out = rngmod.sample_blocks(master_seed, f"collective/{M}/{S!r}", trials, draw, axis=1)
    errors = int(out[0].sum())
    counts = np.bincount(out[2].astype(np.int64), minlength=M)
    freq = counts[counts > 0] / trials
    return CollectiveAttackReport(
        M=M,
        S=float(S),
        trials=trials,
        errors=errors,
        posterior_entropy=float(out[1].mean()),
        posterior_entropy_oracle=posterior_entropy_oracle(S),
        sector_entropy=max(0.0, float(-(freq * np.log2(freq)).sum())),
        sector_entropy_oracle=sector_entropy(S, M),
    )


__all__ = [
    "CollectiveAttackReport",
    "binary_entropy_from_logit",
    "heterodyne_collective_attack",
    "posterior_entropy_oracle",
    "sector_entropy",
]
