"""Physical layer: loss, beamsplitter tap, amplifier noise and Bob/Eve receivers.

Noise convention: a heterodyne outcome is ``alpha + g`` with independent real
and imaginary Gaussian parts of variance 1/2 each; a homodyne quadrature of
``alpha`` along axis ``phi`` is ``Re(alpha * exp(-1j*phi))`` plus Gaussian noise
of variance 1/4. With this convention the antipodal sign-decision error is
``erfc(sqrt(S))/2`` for heterodyne and ``erfc(sqrt(2S))/2`` for homodyne.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from . import rng as rngmod
from .coherent import helstrom_error

HETERODYNE_VAR = 0.5
HOMODYNE_VAR = 0.25
BER_MODELS = ("optimal", "heterodyne", "phase")
DECISION_MODES = ("ideal-helstrom", "homodyne", "heterodyne", "phase-proxy")


@dataclass(frozen=True)
class ChannelSpec:
    eta: float = 1.0
    gain: float = 1.0

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError(f"transmittance must lie in (0, 1], got {self.eta}")
        if self.gain < 1:
            raise ValueError(f"amplifier gain must be >= 1, got {self.gain}")


@dataclass(frozen=True)
class MeasurementRecord:
    """Per-qumode outcomes: complex points, angles in [0, 2pi) or decided bits."""

    kind: str
    values: np.ndarray
    sectors: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("heterodyne", "phase", "bit"):
            raise ValueError(f"unknown record kind {self.kind!r}")


def split(amplitude, eta: float):
    """Beamsplitter of transmittance ``eta``: returns (to Bob, to Eve)."""
    if not 0 < eta <= 1:
        raise ValueError(f"transmittance must lie in (0, 1], got {eta}")
    a = np.asarray(amplitude, dtype=complex)
    return math.sqrt(eta) * a, math.sqrt(1.0 - eta) * a


def _complex_noise(rng: np.random.Generator, var: float, shape) -> np.ndarray:
    shape = () if shape is None else np.empty(shape, dtype=bool).shape
    z = rng.standard_normal(size=(2,) + shape)
    return math.sqrt(var) * (z[0] + 1j * z[1])


def heterodyne_sample(amplitude, rng: np.random.Generator, size=None):
    a = np.asarray(amplitude, dtype=complex)
    shape = a.shape if size is None else size
    out = a + _complex_noise(rng, HETERODYNE_VAR, shape)
    return complex(out) if np.ndim(out) == 0 else out


def homodyne_sample(amplitude, axis: float | np.ndarray, rng: np.random.Generator, size=None):
    a = np.asarray(amplitude, dtype=complex)
    mean = np.real(a * np.exp(-1j * np.asarray(axis)))
    shape = np.shape(mean) if size is None else size
    out = mean + math.sqrt(HOMODYNE_VAR) * rng.standard_normal(size=shape)
    return float(out) if np.ndim(out) == 0 else out


def phase_sample(amplitude, rng: np.random.Generator, size=None):
    """Phase of a heterodyne outcome, in [0, 2pi). A proxy: not the canonical phase measurement."""
    y = heterodyne_sample(amplitude, rng, size)
    out = np.mod(np.angle(y), 2 * np.pi)
    return float(out) if np.ndim(out) == 0 else out


def amplify(amplitude, gain: float, rng: np.random.Generator, size=None):
    """Quantum-limited linear amplifier: mean ``sqrt(G)*alpha``, added noise (G-1)/2 per quadrature."""
    if gain < 1:
        raise ValueError(f"amplifier gain must be >= 1, got {gain}")
    a = np.asarray(amplitude, dtype=complex)
    shape = a.shape if size is None else size
    if gain == 1:
        out = np.broadcast_to(a, shape).copy()
    else:
        out = math.sqrt(gain) * a + _complex_noise(rng, (gain - 1) / 2, shape)
    return complex(out) if np.ndim(out) == 0 else out


def discretize(outcome, M: int):
    """Sector index ``round(angle * M / 2pi) mod M``; accepts complex outcomes or angles."""
    if M < 1 or M & (M - 1):
        raise ValueError(f"M must be a power of two, got {M}")
    x = np.asarray(outcome)
    angle = np.angle(x) if np.iscomplexobj(x) else x.astype(float)
    sector = np.floor(np.mod(angle, 2 * np.pi) * M / (2 * np.pi) + 0.5).astype(np.int64) % M
    return int(sector) if sector.ndim == 0 else sector


def heterodyne_phase_density(phi, S: float):
    """Density of the heterodyne outcome phase for amplitude ``sqrt(S)`` on the real axis."""
    c = np.cos(phi)
    s2 = np.sin(phi) ** 2
    r = math.sqrt(S)
    return (math.exp(-S) + math.sqrt(math.pi * S) * c * np.exp(-S * s2) * (1 + special.erf(r * c))) / (2 * math.pi)


@lru_cache(maxsize=256)
def _sector_probabilities(S: float, M: int) -> tuple[float, ...]:
    half = math.pi / M
    probs = []
    for j in range(M):
        centre = 2 * math.pi * j / M
        val, _ = integrate.quad(heterodyne_phase_density, centre - half, centre + half, args=(S,), epsabs=1e-14, epsrel=1e-12, limit=200)
        probs.append(max(val, 0.0))
    total = sum(probs)
    return tuple(p / total for p in probs)


def sector_probabilities(S: float, M: int) -> np.ndarray:
    """``p[j]``: probability that the heterodyne phase of ``sqrt(S)`` falls in sector ``j``."""
    if S < 0:
        raise ValueError(f"photon number must be nonnegative, got {S}")
    if S == 0:
        return np.full(M, 1.0 / M)
    return np.array(_sector_probabilities(float(S), int(M)))


def exact_ber(model: str, S: float) -> float | None:
    """Exact antipodal error probability, where an elementary form exists."""
    if model == "optimal":
        return helstrom_error(math.exp(-2 * S))
    if model == "heterodyne":
        return 0.5 * math.erfc(math.sqrt(S))
    if model == "homodyne":
        return 0.5 * math.erfc(math.sqrt(2 * S))
    if model == "phase":
        return None
    raise ValueError(f"unknown receiver model {model!r}")


def analytic_ber(model: str, S: float, exact: bool = False) -> float | None:
    """Bit-error curves ``exp(-4S)/4``, ``exp(-S)/2``, ``exp(-2S)/2`` for optimal, heterodyne, phase.

    ``exact=True`` returns the exact forms instead (``None`` for the phase receiver).
    """
    if not S > 0:
        raise ValueError(f"photon number must be positive, got {S}")
    if exact:
        return exact_ber(model, S)
    if model == "optimal":
        return 0.25 * math.exp(-4 * S)
    if model == "heterodyne":
        return 0.5 * math.exp(-S)
    if model == "phase":
        return 0.5 * math.exp(-2 * S)
    raise ValueError(f"unknown receiver model {model!r}; expected one of {BER_MODELS}")


def bob_decide(params, l, mode: str, received, rng: np.random.Generator):
    """Bob's keyed decision on the received amplitude(s) in basis ``l``.

    ``ideal-helstrom`` flips the noiseless keyed bit with the Helstrom error at the
    received photon number; ``homodyne`` decides by the sign of a homodyne sample
    on the basis axis; ``heterodyne`` and ``phase-proxy`` use a heterodyne sample.
    """
    l = np.asarray(l)
    received = np.asarray(received, dtype=complex)
    axis = params.angle(l)
    plus_bit = l & 1
    if np.any(l < 0) or np.any(l >= params.M // 2):
        raise ValueError("basis index out of range")
    if mode == "ideal-helstrom":
        proj = np.real(received * np.exp(-1j * axis))
        true_bit = np.where(proj >= 0, plus_bit, 1 ^ plus_bit)
        x = np.exp(-4 * np.abs(received) ** 2)  # squared overlap of the antipodal pair
        flip_p = 0.5 * x / (1 + np.sqrt(1 - x))
        flips = rng.random(size=true_bit.shape) < flip_p
        out = true_bit ^ flips
    elif mode == "homodyne":
        q = homodyne_sample(received, axis, rng)
        out = np.where(np.asarray(q) >= 0, plus_bit, 1 ^ plus_bit)
    elif mode in ("heterodyne", "phase-proxy"):
        y = np.asarray(heterodyne_sample(received, rng))
        proj = np.real(y * np.exp(-1j * axis))
        out = np.where(proj >= 0, plus_bit, 1 ^ plus_bit)
    else:
        raise ValueError(f"unknown decision mode {mode!r}; expected one of {DECISION_MODES}")
    out = np.asarray(out, dtype=np.int64)
    return int(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------- Monte Carlo estimates


@dataclass(frozen=True)
class BerEstimate:
    mode: str
    photons: float
    trials: int
    errors: int
    reference: float | None

    @property
    def rate(self) -> float:
        return self.errors / self.trials

    @property
    def sigma(self) -> float | None:
        if self.reference is None:
            return None
        return math.sqrt(self.reference * (1 - self.reference) / self.trials)

    @property
    def z_score(self) -> float | None:
        if self.reference is None or self.sigma == 0:
            return None
        return (self.rate - self.reference) / self.sigma


def monte_carlo_ber(mode: str, photons: float, trials: int, master_seed: int) -> BerEstimate:
    """Antipodal BER of one receiver: send ``+sqrt(S)`` in basis 0 (bit 0), count wrong decisions."""
    from .cipher import AlphaEtaParams

    params = AlphaEtaParams(4, photons)
    alpha = params.alpha0

    def draw(g: np.random.Generator, size: int) -> np.ndarray:
        bits = bob_decide(params, np.zeros(size, dtype=np.int64), mode, np.full(size, alpha, complex), g)
        return np.asarray(bits, dtype=np.int64)

    decisions = rngmod.sample_blocks(master_seed, f"ber/{mode}", trials, draw)
    errors = int(decisions.sum())
    reference = {
        "ideal-helstrom": exact_ber("optimal", photons),
        "homodyne": exact_ber("homodyne", photons),
        "heterodyne": exact_ber("heterodyne", photons),
        "phase-proxy": exact_ber("heterodyne", photons),
    }[mode]
    return BerEstimate(mode, photons, trials, errors, reference)


@dataclass(frozen=True)
class MomentEstimate:
    gain: float
    trials: int
    mean: complex
    var_re: float
    var_im: float
    expected_mean: complex
    expected_var: float

    def z_scores(self) -> dict[str, float]:
        n = self.trials
        se_mean = math.sqrt(self.expected_var / n)
        se_var = self.expected_var * math.sqrt(2.0 / (n - 1))
        return {
            "mean_re": (self.mean.real - self.expected_mean.real) / se_mean,
            "mean_im": (self.mean.imag - self.expected_mean.imag) / se_mean,
            "var_re": (self.var_re - self.expected_var) / se_var,
            "var_im": (self.var_im - self.expected_var) / se_var,
        }


def amplifier_moments(alpha: complex, gain: float, trials: int, master_seed: int) -> MomentEstimate:
    """Heterodyne statistics after one amplifier: expected mean sqrt(G)*alpha, variance G/2 per quadrature."""

    def draw(g: np.random.Generator, size: int) -> np.ndarray:
        return np.asarray(heterodyne_sample(amplify(np.full(size, alpha, complex), gain, g), g))

    y = rngmod.sample_blocks(master_seed, f"amplifier/{gain!r}", trials, draw)
    return MomentEstimate(
        gain,
        trials,
        complex(y.mean()),
        float(y.real.var(ddof=1)),
        float(y.imag.var(ddof=1)),
        math.sqrt(gain) * complex(alpha),
        HETERODYNE_VAR + (gain - 1) / 2,
    )
