"""Experiment configuration: one pydantic model per experiment kind.

A config document is a single JSON object with a ``kind`` field, the shared
run fields (``seed``, ``trials``, ``out``, ``format``) and kind-specific
parameters. Unknown fields are rejected.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

U64_MAX = 2**64 - 1


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: str
    seed: int = Field(0, ge=0, le=U64_MAX)
    trials: int | None = Field(None, ge=1)
    out: str | None = None
    format: Literal["json", "csv"] = "json"


class ConstellationConfig(RunConfig):
    kind: Literal["constellation"] = "constellation"
    M: int = 32
    photons: float = Field(1.0, gt=0)
    keylen: int = Field(10, ge=2, le=32)
    qumodes: int = Field(8, ge=1, le=4096)


class BerConfig(RunConfig):
    kind: Literal["ber"] = "ber"
    photons: float = Field(7.0, gt=0)
    monte_carlo: list[Literal["ideal-helstrom", "homodyne", "heterodyne", "phase-proxy"]] = ["heterodyne"]
    amplifier_gain: float | None = Field(None, ge=1)


CipherKind = Literal["one-time-pad", "lfsr-xor", "alpha-eta-discretized", "random-table"]


class CipherFields(RunConfig):
    cipher: CipherKind = "lfsr-xor"
    keylen: int = Field(3, ge=1, le=12)
    M: int = 4
    photons: float = Field(1.0, gt=0)
    noiseless: bool = False
    alphabet: int = Field(2, ge=2, le=16)
    randomization: int = Field(1, ge=1, le=8)
    redundant: bool = False
    length: int = Field(8, ge=1, le=64)
    plaintext_dist: list[float] | None = None


class EntropyConfig(CipherFields):
    kind: Literal["entropy"] = "entropy"
    n: int = Field(2, ge=1, le=16)


class DistancesConfig(CipherFields):
    kind: Literal["distances"] = "distances"
    n_max: int = Field(6, ge=1, le=16)


class AttackIRunConfig(RunConfig):
    kind: Literal["attack-i"] = "attack-i"
    keylen: int = Field(8, ge=1, le=16)
    M: int = 32
    photons: float = Field(0.5, gt=0)
    eta: float = Field(0.5, gt=0, le=1)
    copies: int | None = Field(None, ge=1)
    known_length: int = Field(4, ge=0)
    rule: Literal["exact", "max-likelihood"] = "exact"
    copy_mode: Literal["per-key", "resplit"] = "per-key"
    quantum: bool = True


class GroverConfig(RunConfig):
    kind: Literal["grover"] = "grover"
    keylen: int = Field(10, ge=1, le=4096)
    marked: int = Field(1, ge=1)
    t: int | None = Field(None, ge=0)

    @model_validator(mode="after")
    def _marked_fits(self):
        if self.marked > 1 << self.keylen:
            raise ValueError(f"marked must not exceed 2**keylen = {1 << self.keylen}")
        return self


class OrthoCurveConfig(RunConfig):
    kind: Literal["ortho-curve"] = "ortho-curve"
    keylen: int = Field(6, ge=1, le=10)
    M: int = 32
    photons: float = Field(2.0, gt=0)
    lengths: list[int] = Field(default_factory=lambda: [0] + list(range(4, 65, 4)))
    plaintext: list[Literal[0, 1]] | None = None

    @model_validator(mode="after")
    def _grid(self):
        if any(n < 0 for n in self.lengths):
            raise ValueError("lengths must be nonnegative")
        if self.plaintext is not None and max(self.lengths, default=0) > len(self.plaintext):
            raise ValueError("plaintext is shorter than the largest requested length")
        return self


class Bb84Config(RunConfig):
    kind: Literal["bb84-attack"] = "bb84-attack"
    generator: list[list[Literal[0, 1]]] | Literal["hamming74"] = "hamming74"
    photons: float = Field(0.5, gt=0)
    eta: float = Field(0.5, gt=0, le=1)
    delta: float = Field(0.1, ge=0)
    repetitions: list[int] = Field(default_factory=lambda: [1, 2, 3])


class ResourcesConfig(RunConfig):
    kind: Literal["resources"] = "resources"
    keylen: int = Field(2000, ge=1, le=65536)
    fiber_loss_db_per_km: float = Field(0.2, gt=0)
    copies: int = Field(1, ge=1)
    eta: str | float | None = None


class KeygenYieldConfig(RunConfig):
    kind: Literal["keygen-yield"] = "keygen-yield"
    photons: float = Field(7.0, gt=0)
    n: float = Field(1e9, ge=1)
    eve_models: list[Literal["heterodyne", "phase"]] = ["heterodyne", "phase"]
    accounting: list[Literal["paper", "entropy"]] = ["paper", "entropy"]


class PaperNumbersConfig(RunConfig):
    kind: Literal["paper-numbers"] = "paper-numbers"


class CollectiveConfig(RunConfig):
    kind: Literal["collective-attack"] = "collective-attack"
    M: int = 32
    photons: float = Field(7.0, gt=0)


CONFIG_MODELS: dict[str, type[RunConfig]] = {
    m.model_fields["kind"].default: m
    for m in (
        ConstellationConfig,
        BerConfig,
        EntropyConfig,
        DistancesConfig,
        AttackIRunConfig,
        GroverConfig,
        OrthoCurveConfig,
        Bb84Config,
        ResourcesConfig,
        KeygenYieldConfig,
        PaperNumbersConfig,
        CollectiveConfig,
    )
}

DEFAULT_TRIALS = {"ber": 10**6, "attack-i": 50, "collective-attack": 10**5}


def parse_config(data: dict) -> RunConfig:
    """Validate a config document; raises ``pydantic.ValidationError`` or ``ValueError``."""
    kind = data.get("kind")
    if kind not in CONFIG_MODELS:
        raise ValueError(f"kind: unknown experiment kind {kind!r}; expected one of {sorted(CONFIG_MODELS)}")
    return CONFIG_MODELS[kind].model_validate(data)


def resolved_trials(cfg: RunConfig) -> int | None:
    return cfg.trials if cfg.trials is not None else DEFAULT_TRIALS.get(cfg.kind)
