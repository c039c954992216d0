"""Known-plaintext brute force on tapped copies, simulated at desk scale.

Eve holds one tapped copy per candidate seed key. For every candidate she runs a
keyed receiver like Bob's on that key's copy and compares the decided bits with
the known plaintext. Survivors are the keys still consistent after ``s`` bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .. import rng as rngmod
from ..cipher import AlphaEtaParams, key_basis_table, map_to_state
from ..entropy import BudgetExceeded
from ..measurement import HOMODYNE_VAR
from .resources import copies_condition

DECISION_BUDGET = 10**9
ML_SLACK = 1e-9


@dataclass(frozen=True)
class AttackIConfig:
    """Parameters of one brute-force experiment.

    ``quantum=False`` is the noiseless digital mode: Eve sees the exact state
    index (ENC box plus mapper, no quantum noise). ``copy_mode`` is
    ``"per-key"`` (each candidate's copy carries the full tap ``1 - eta``) or
    ``"resplit"`` (the tapped beam is split evenly into ``copies`` pieces).
    """

    key_bits: int = 8
    M: int = 32
    S: float = 0.5
    eta: float = 0.5
    copies: int = 256
    known_length: int = 4
    trials: int = 50
    rule: str = "exact"
    copy_mode: str = "per-key"
    quantum: bool = True
    taps: int | None = None

    def __post_init__(self):
        if not 1 <= self.key_bits <= 16:
            raise ValueError(f"key_bits must lie in [1, 16], got {self.key_bits}")
        AlphaEtaParams(self.M, self.S)
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if self.rule not in ("exact", "max-likelihood"):
            raise ValueError(f"rule must be 'exact' or 'max-likelihood', got {self.rule!r}")
        if self.copy_mode not in ("per-key", "resplit"):
            raise ValueError(f"copy_mode must be 'per-key' or 'resplit', got {self.copy_mode!r}")
        if self.known_length < 0 or self.trials < 1:
            raise ValueError("known_length must be >= 0 and trials >= 1")
        keys = 1 << self.key_bits
        decisions = keys * max(self.known_length, 1) * self.trials
        if self.quantum and self.rule == "max-likelihood":
            decisions *= keys
        if decisions > DECISION_BUDGET:
            raise BudgetExceeded("attack I", decisions, DECISION_BUDGET)
        if self.quantum:
            if self.copies < keys:
                raise ValueError(f"need one copy per candidate key: copies={self.copies} < 2**{self.key_bits}")
            if self.copy_mode == "per-key" and not copies_condition(self.copies, self.eta, self.key_bits).satisfied:
                raise ValueError(
                    f"copies condition r(1-eta) >= 2^|K| eta fails: {self.copies}*(1-{self.eta}) < {keys}*{self.eta}"
                )

    @property
    def eve_photons(self) -> float:
        tap = self.S * (1 - self.eta)
        return tap if self.copy_mode == "per-key" else tap / self.copies


@dataclass(frozen=True)
class SurvivorReport:
    config: AttackIConfig
    survivors: np.ndarray  # (trials, known_length + 1)
    true_key_survived: np.ndarray  # (trials, known_length + 1) bool

    @property
    def lengths(self) -> np.ndarray:
        return np.arange(self.survivors.shape[1])

    @property
    def median(self) -> np.ndarray:
        return np.median(self.survivors, axis=0)

    @property
    def quartiles(self) -> tuple[np.ndarray, np.ndarray]:
        return np.percentile(self.survivors, 25, axis=0), np.percentile(self.survivors, 75, axis=0)

    @property
    def true_key_rate(self) -> np.ndarray:
        return self.true_key_survived.mean(axis=0)

    @property
    def empirical_n1(self) -> int | None:
        """First ``s`` at which at least half the trials leave a unique survivor."""
        unique = (self.survivors == 1).mean(axis=0) >= 0.5
        hits = np.flatnonzero(unique)
        return int(hits[0]) if hits.size else None

    def rows(self) -> list[dict]:
        q1, q3 = self.quartiles
        return [
            {
                "s": int(s),
                "median": float(self.median[s]),
                "q1": float(q1[s]),
                "q3": float(q3[s]),
                "true_key_rate": float(self.true_key_rate[s]),
            }
            for s in self.lengths
        ]


def _trial(cfg: AttackIConfig, bases: np.ndarray, master_seed: int, index: int):
    g = rngmod.block_rng(master_seed, "attack-i", index)
    keys, s = bases.shape
    true_key = int(g.integers(keys))
    bits = g.integers(0, 2, size=s)
    m_true = map_to_state(bases[true_key], bits, cfg.M) if s else np.zeros(0, np.int64)
    m_cand = map_to_state(bases, bits[None, :], cfg.M) if s else np.zeros((keys, 0), np.int64)
    if not cfg.quantum:
        mismatch = m_cand != m_true[None, :]
        scores = np.cumsum(mismatch, axis=1)
        survive = scores == 0
    else:
        params = AlphaEtaParams(cfg.M, cfg.S)
        amp = np.sqrt(cfg.eve_photons) * np.exp(1j * params.angle(m_true))  # (s,)
        axes = params.angle(bases)  # copy k measured along candidate k's axis
        q = np.real(amp[None, :] * np.exp(-1j * axes)) + np.sqrt(HOMODYNE_VAR) * g.standard_normal((keys, s))
        if cfg.rule == "exact":
            plus_bit = bases & 1
            decided = np.where(q >= 0, plus_bit, 1 ^ plus_bit)
            survive = np.cumsum(decided != bits[None, :], axis=1) == 0
        else:
            # hypothesis k predicts mean Re(alpha_{m_k} e^{-i theta_{l_j}}) on copy j
            hyp_amp = np.sqrt(cfg.eve_photons) * np.exp(1j * params.angle(m_cand))  # (k, s)
            mu = np.real(hyp_amp[:, None, :] * np.exp(-1j * axes)[None, :, :])  # (k, j, s)
            sq = ((q[None, :, :] - mu) ** 2).sum(axis=1) / (2 * HOMODYNE_VAR)  # (k, s)
            nll = np.cumsum(sq, axis=1)
            survive = nll <= nll.min(axis=0, keepdims=True) + ML_SLACK
    counts = np.concatenate([[keys], survive.sum(axis=0)])
    true_alive = np.concatenate([[True], survive[true_key]])
    return counts, true_alive


def attack_i(config: AttackIConfig, master_seed: int = 0) -> SurvivorReport:
    """Survivor counts versus known-plaintext length over independent trials."""
    bases = key_basis_table(config.key_bits, config.M, config.known_length, config.taps)
    results = rngmod.fan_out(lambda i: _trial(config, bases, master_seed, i), config.trials)
    survivors = np.stack([r[0] for r in results])
    alive = np.stack([r[1] for r in results])
    return SurvivorReport(config, survivors, alive)


def sign_test_greater(a, b) -> float:
    """One-sided sign-test p-value for ``a > b`` over paired trials (ties dropped)."""
    diff = np.asarray(a) - np.asarray(b)
    wins = int((diff > 0).sum())
    n = int((diff != 0).sum())
    if n == 0:
        return 1.0
    return float(stats.binomtest(wins, n, 0.5, alternative="greater").pvalue)
