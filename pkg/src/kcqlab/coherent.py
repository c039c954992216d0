"""Coherent-state overlaps, binary discrimination error and the square-root measurement.

Amplitudes are plain Python/NumPy complex numbers: ``re + 1j*im`` with mean
photon number ``abs(a)**2``. Overlaps are carried in log-magnitude form so that
products over many modes never underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PSD_TOLERANCE = 1e-10
EIGEN_CLAMP = 1e-12
PRIOR_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Overlap:
    """Inner product ``<a|b>`` stored as ``exp(log_magnitude + 1j*phase)``."""

    log_magnitude: float
    phase: float

    @property
    def magnitude(self) -> float:
        return math.exp(self.log_magnitude)

    @property
    def value(self) -> complex:
        return complex(np.exp(self.log_magnitude + 1j * self.phase))


@dataclass(frozen=True)
class GramMatrix:
    """Gram matrix of pure product states, with the log-domain entries kept alongside."""

    log_magnitude: np.ndarray
    phase: np.ndarray

    @property
    def dimension(self) -> int:
        return self.log_magnitude.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return np.exp(self.log_magnitude + 1j * self.phase)

    def __array__(self, dtype=None, copy=None):
        out = self.entries
        return out if dtype is None else out.astype(dtype)


def overlap(a: complex, b: complex) -> Overlap:
    """Overlap of two coherent states, ``<a|b> = exp(-|a-b|^2/2 + 1j*Im(conj(a)*b))``."""
    a = complex(a)
    b = complex(b)
    for z in (a, b):
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError(f"amplitude must be finite, got {z!r}")
    return Overlap(-0.5 * abs(a - b) ** 2, (a.conjugate() * b).imag)


def helstrom_error(gamma: float, p0: float = 0.5, p1: float = 0.5) -> float:
    """Minimum error probability for two pure states with overlap magnitude ``gamma``.

    Evaluated as ``2*p0*p1*gamma**2 / (1 + sqrt(1 - 4*p0*p1*gamma**2))`` which is
    algebraically ``(1 - sqrt(1 - 4 p0 p1 gamma^2)) / 2`` but keeps full relative
    precision when ``gamma`` is tiny.
    """
    if p0 < 0 or p1 < 0 or abs(p0 + p1 - 1.0) > PRIOR_TOLERANCE:
        raise ValueError(f"priors must be nonnegative and sum to 1, got ({p0}, {p1})")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"overlap magnitude must lie in [0, 1], got {gamma}")
    x = 4.0 * p0 * p1 * gamma * gamma
    value = 0.5 * x / (1.0 + math.sqrt(max(0.0, 1.0 - x)))
    return min(value, p0, p1)


def _as_state_array(states) -> np.ndarray:
    if isinstance(states, np.ndarray) and states.ndim == 2:
        arr = states.astype(complex, copy=False)
    else:
        rows = [np.atleast_1d(np.asarray(s, dtype=complex)) for s in states]
        if not rows:
            raise ValueError("need at least one state")
        widths = {r.shape[0] for r in rows} if rows[0].size else {0}
        if len(widths) != 1 or any(r.ndim != 1 for r in rows):
            raise ValueError(f"all states must have the same mode count, got {sorted(widths)}")
        arr = np.vstack(rows) if rows[0].size else np.zeros((len(rows), 0), complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("amplitudes must be finite")
    return arr


def gram_prefixes(states, lengths):
    """Yield the Gram matrix of the first ``n`` modes for each ``n`` in ascending ``lengths``.

    Log-magnitudes accumulate one mode at a time; each increment is nonpositive, so
    appending modes can never increase any entry, even in floating point.
    """
    arr = _as_state_array(states)
    n_states, modes = arr.shape
    lengths = list(lengths)
    if any(b < a for a, b in zip(lengths, lengths[1:])) or (lengths and (lengths[0] < 0 or lengths[-1] > modes)):
        raise ValueError(f"prefix lengths must be ascending within [0, {modes}]")
    log_mag = np.zeros((n_states, n_states))
    phase = np.zeros((n_states, n_states))
    done = 0
    for n in lengths:
        for m in range(done, n):
            col = arr[:, m]
            diff = col[:, None] - col[None, :]
            log_mag -= 0.5 * (diff.real**2 + diff.imag**2)
            phase += (np.conj(col)[:, None] * col[None, :]).imag
        done = n
        lm = log_mag.copy()
        ph = phase.copy()
        np.fill_diagonal(lm, 0.0)
        np.fill_diagonal(ph, 0.0)
        yield GramMatrix(lm, ph)


def gram_matrix(states) -> GramMatrix:
    """Gram matrix of product coherent states given as an ``(N, modes)`` amplitude array.

    Entry ``(i, j)`` is the product over modes of ``overlap(states[i][m], states[j][m])``,
    accumulated in the log domain.
    """
    arr = _as_state_array(states)
    return next(gram_prefixes(arr, [arr.shape[1]]))


def _entries(g) -> np.ndarray:
    if isinstance(g, GramMatrix):
        return g.entries
    arr = np.asarray(g, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {arr.shape}")
    return arr


def _check_priors(priors, n: int) -> np.ndarray:
    if priors is None:
        return np.full(n, 1.0 / n)
    p = np.asarray(priors, dtype=float)
    if p.shape != (n,):
        raise ValueError(f"expected {n} priors, got shape {p.shape}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > PRIOR_TOLERANCE:
        raise ValueError("priors must be nonnegative and sum to 1")
    return p


def pgm_error(g, priors=None) -> float:
    """Error probability of the pretty-good (square-root) measurement.

    With ``W = diag(sqrt(p)) G diag(sqrt(p))`` the success probability is
    ``sum_i ((W^{1/2})_{ii})^2``. Priors default to uniform.
    """
    gm = _entries(g)
    n = gm.shape[0]
    if n > 2**12:
        raise ValueError(f"Gram dimension {n} exceeds the 4096 eigendecomposition budget")
    p = _check_priors(priors, n)
    mags = np.abs(gm)
    if np.all(mags == 1.0):
        # all states equal up to phase: W is a rank-one projector and W^{1/2} = W
        return float(1.0 - np.sum(p * p))
    herm = 0.5 * (gm + gm.conj().T)
    sp = np.sqrt(p)
    w = sp[:, None] * herm * sp[None, :]
    evals, evecs = np.linalg.eigh(w)
    if evals[0] < -PSD_TOLERANCE:
        raise ValueError(f"Gram matrix is not positive semidefinite (min eigenvalue {evals[0]:.3e})")
    evals = np.where(evals < EIGEN_CLAMP * evals[-1], 0.0, evals)
    root_diag = (np.abs(evecs) ** 2) @ np.sqrt(evals)
    success = float(np.sum(root_diag**2))
    return float(min(max(1.0 - success, 0.0), 1.0 - 1.0 / n + 1e-10))


def pairwise_bound(g) -> float:
    """Largest off-diagonal overlap magnitude."""
    if isinstance(g, GramMatrix):
        mags = np.exp(g.log_magnitude)
    else:
        mags = np.abs(_entries(g))
    n = mags.shape[0]
    if n < 2:
        raise ValueError("pairwise bound needs at least two states")
    off = mags[~np.eye(n, dtype=bool)]
    return float(off.max())
