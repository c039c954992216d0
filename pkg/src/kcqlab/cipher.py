"""The alpha-eta encryption pipeline and small tabulated ciphers.

Running key: a Fibonacci LFSR clocked one bit at a time. With state bits
``s_t .. s_{t+L-1}`` and feedback mask ``c`` (bit ``i`` is the coefficient of
``x**i`` in the characteristic polynomial ``x**L + sum c_i x**i``) the
recurrence is ``s_{t+L} = XOR_i c_i s_{t+i}`` and the output stream is ``s_0,
s_1, ...``. The seed integer holds ``s_i`` in bit ``i``, so the first ``L``
output bits are the seed itself.

Each qumode consumes ``log2(M/2)`` consecutive running-key bits, most
significant bit first, to pick one of the ``M/2`` antipodal basis pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measurement import sector_probabilities

# x**L + (mask) : lowest-weight primitive polynomials, checked by tests/test_cipher.py.
PRIMITIVE_TAPS = {
    2: 0x3, 3: 0x3, 4: 0x3, 5: 0x5, 6: 0x3, 7: 0x3, 8: 0x87, 9: 0x11,
    10: 0x9, 11: 0x5, 12: 0x107, 13: 0x27, 14: 0x1007, 15: 0x3, 16: 0x100B,
    17: 0x9, 18: 0x81, 19: 0x27, 20: 0x9, 21: 0x5, 22: 0x3, 23: 0x21,
    24: 0x87, 25: 0x9, 26: 0x47, 27: 0x27, 28: 0x9, 29: 0x5, 30: 0x800007,
    31: 0x9, 32: 0x400007,
}


def _is_power_of_two(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


@dataclass(frozen=True)
class AlphaEtaParams:
    """Constellation of ``M`` coherent states ``sqrt(S) * exp(2j*pi*m/M)``."""

    M: int
    S: float

    def __post_init__(self):
        if not isinstance(self.M, (int, np.integer)) or self.M < 4 or not _is_power_of_two(int(self.M)):
            raise ValueError(f"M must be a power of two >= 4, got {self.M!r}")
        if not (self.S > 0 and math.isfinite(self.S)):
            raise ValueError(f"mean photon number S must be positive, got {self.S!r}")

    @property
    def alpha0(self) -> float:
        return math.sqrt(self.S)

    @property
    def bits_per_qumode(self) -> int:
        return int(self.M // 2).bit_length() - 1

    def angle(self, m):
        return 2 * np.pi * np.asarray(m) / self.M

    def constellation(self) -> np.ndarray:
        return self.alpha0 * np.exp(1j * self.angle(np.arange(self.M)))


@dataclass(frozen=True)
class LfsrSpec:
    length: int
    seed: int
    taps: int | None = None

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"LFSR length must be positive, got {self.length}")
        taps = self.taps
        if taps is None:
            if self.length not in PRIMITIVE_TAPS:
                raise ValueError(f"no default primitive polynomial for length {self.length}")
            taps = PRIMITIVE_TAPS[self.length]
        if taps >> self.length == 1:
            taps ^= 1 << self.length  # leading x**L term given explicitly
        if taps >> self.length:
            raise ValueError(f"tap mask {self.taps:#x} has degree above {self.length}")
        if not taps & 1:
            raise ValueError("tap mask must include the constant term (bit 0)")
        object.__setattr__(self, "taps", taps)
        if not 0 <= self.seed < 1 << self.length:
            raise ValueError(f"seed must fit in {self.length} bits, got {self.seed}")


@dataclass(frozen=True)
class DsrSpec:
    """Deliberate signal randomization: uniform angular offset in (-half_width, half_width)."""

    half_width: float = math.pi / 2
    enabled: bool = True

    def __post_init__(self):
        if not 0 < self.half_width <= math.pi / 2:
            raise ValueError(f"DSR half-width must lie in (0, pi/2], got {self.half_width}")


def lfsr_bits(length: int, taps: int, state: int, count: int) -> np.ndarray:
    """Raw output bits of the LFSR; a zero state is allowed here and yields zeros."""
    out = np.empty(count, dtype=np.uint8)
    top = length - 1
    for t in range(count):
        out[t] = state & 1
        fb = (state & taps).bit_count() & 1
        state = (state >> 1) | (fb << top)
    return out


def lfsr_bit_period(spec: LfsrSpec) -> int:
    """Period of the output stream from ``spec.seed``, found by walking the state cycle."""
    if spec.seed == 0:
        return 1
    top = spec.length - 1
    state = spec.seed
    for t in range(1, 1 << spec.length):
        fb = (state & spec.taps).bit_count() & 1
        state = (state >> 1) | (fb << top)
        if state == spec.seed:
            return t
    raise RuntimeError("LFSR did not return to its seed state")  # pragma: no cover


def paper_period(keylen: int, M: int) -> float:
    """Running-key period in qumodes as quoted for alpha-eta: ``2**|K| / log2(M)``."""
    return 2.0**keylen / math.log2(M)


def chunk_bits(bits: np.ndarray, width: int) -> np.ndarray:
    """Group a bit stream into ``width``-bit integers, most significant bit first."""
    n = bits.shape[-1] // width
    grouped = bits[..., : n * width].reshape(bits.shape[:-1] + (n, width)).astype(np.int64)
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return grouped @ weights


def running_key_stream(spec: LfsrSpec, qumodes: int, M: int = 4) -> np.ndarray:
    """Basis index for each of ``qumodes`` qumodes, drawn from the LFSR running key."""
    if spec.seed == 0:
        raise ValueError("LFSR seed must be nonzero")
    if qumodes < 1:
        raise ValueError(f"qumode count must be at least 1, got {qumodes}")
    width = AlphaEtaParams(M, 1.0).bits_per_qumode
    bits = lfsr_bits(spec.length, spec.taps, spec.seed, qumodes * width)
    return chunk_bits(bits, width)


def key_basis_table(keylen: int, M: int, qumodes: int, taps: int | None = None) -> np.ndarray:
    """Basis sequences for every seed ``0 .. 2**keylen - 1`` (zero seed included), shape (keys, qumodes)."""
    taps = LfsrSpec(keylen, 1, taps).taps
    width = AlphaEtaParams(M, 1.0).bits_per_qumode
    bits = np.stack([lfsr_bits(keylen, taps, k, qumodes * width) for k in range(1 << keylen)])
    return chunk_bits(bits, width).reshape(1 << keylen, qumodes)


def map_to_state(l, b, M: int):
    """Interleaved mapping of (basis, bit) to a constellation index.

    ``m = l + (b XOR (l mod 2)) * M/2``: adjacent states within a half circle
    carry opposite bits. Works elementwise on arrays.
    """
    l_arr = np.asarray(l)
    if np.any(l_arr < 0) or np.any(l_arr >= M // 2):
        raise ValueError(f"basis index out of range [0, {M // 2})")
    m = l_arr + ((np.asarray(b) ^ (l_arr & 1)) * (M // 2))
    return int(m) if m.ndim == 0 else m


def decrypt_bit(params: AlphaEtaParams, l: int, m_hat: int) -> int:
    """Bit carried by state ``m_hat`` in basis ``l``."""
    half = params.M // 2
    if not 0 <= l < half:
        raise ValueError(f"basis index {l} out of range [0, {half})")
    if m_hat == l:
        return l & 1
    if m_hat == l + half:
        return 1 ^ (l & 1)
    raise ValueError(f"state {m_hat} is not in basis pair {{{l}, {l + half}}}")


def encrypt_block(
    params: AlphaEtaParams,
    key: LfsrSpec,
    bits,
    dsr: DsrSpec | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Transmitted coherent amplitudes for a block of plaintext bits."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size == 0:
        raise ValueError("plaintext must be a nonempty 1-D bit sequence")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("plaintext must consist of 0/1 values")
    bases = running_key_stream(key, bits.size, params.M)
    theta = params.angle(map_to_state(bases, bits, params.M))
    if dsr is not None and dsr.enabled:
        if rng is None:
            raise ValueError("DSR needs a randomness stream")
        theta = theta + rng.uniform(-dsr.half_width, dsr.half_width, size=theta.shape)
    return params.alpha0 * np.exp(1j * theta)


def keyed_decision(params: AlphaEtaParams, l, outcome) -> np.ndarray:
    """Bit decided by the sign of the outcome projected on basis axis ``l``."""
    l = np.asarray(l)
    proj = np.real(np.asarray(outcome) * np.exp(-1j * params.angle(l)))
    plus_bit = l & 1
    return np.where(proj >= 0, plus_bit, 1 ^ plus_bit)


# --------------------------------------------------------------------------- tabulated ciphers

CIPHER_KINDS = ("one-time-pad", "lfsr-xor", "alpha-eta-discretized", "random-table")


@dataclass(frozen=True)
class CipherModel:
    """A finite keyed cipher acting symbol by symbol.

    ``tables[i, k, x, y]`` is ``p(y_i = y | key k, x_i = x)`` at position ``i``.
    Blocks longer than the table either wrap around (``periodic``) or are rejected.
    Qumodes are independent given the key, so block probabilities are products.
    """

    kind: str
    tables: np.ndarray
    periodic: bool = False
    exact_decryption: bool = True
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.tables, dtype=float)
        if t.ndim != 4:
            raise ValueError("tables must have shape (positions, keys, plaintext, ciphertext)")
        if np.any(t < 0) or not np.allclose(t.sum(axis=-1), 1.0, atol=1e-12):
            raise ValueError("each table row must be a probability distribution")
        t.setflags(write=False)
        object.__setattr__(self, "tables", t)
        if self.exact_decryption and not self._decryptable():
            raise ValueError(f"{self.kind} cipher violates decryption exactness H(X|KY)=0")

    @property
    def n_keys(self) -> int:
        return self.tables.shape[1]

    @property
    def key_entropy(self) -> float:
        return math.log2(self.n_keys)

    @property
    def plaintext_size(self) -> int:
        return self.tables.shape[2]

    @property
    def ciphertext_size(self) -> int:
        return self.tables.shape[3]

    @property
    def max_length(self) -> int | None:
        return None if self.periodic else self.tables.shape[0]

    @property
    def is_nonrandom(self) -> bool:
        return bool(np.all((self.tables == 0) | (self.tables == 1)))

    @property
    def randomization(self) -> int:
        """Largest ciphertext support of any (position, key, plaintext symbol)."""
        return int((self.tables > 0).sum(axis=-1).max())

    def position_table(self, i: int) -> np.ndarray:
        length = self.tables.shape[0]
        if i >= length and not self.periodic:
            raise ValueError(f"{self.kind} cipher is tabulated for {length} positions only, asked for {i + 1}")
        return self.tables[i % length]

    def _decryptable(self) -> bool:
        support = self.tables > 0
        # each ciphertext symbol reachable from at most one plaintext symbol per (position, key)
        return bool(np.all(support.sum(axis=2) <= 1))


def _xor_tables(keystream: np.ndarray) -> np.ndarray:
    """Tables for y = x XOR keystream over bits; keystream shape (keys, positions)."""
    keys, length = keystream.shape
    t = np.zeros((length, keys, 2, 2))
    for x in (0, 1):
        y = x ^ keystream.T  # (positions, keys)
        t[np.arange(length)[:, None], np.arange(keys)[None, :], x, y] = 1.0
    return t


def build_cipher_model(
    kind: str,
    *,
    key_bits: int = 2,
    length: int = 8,
    M: int = 4,
    photons: float = 1.0,
    noiseless: bool = False,
    alphabet: int = 2,
    randomization: int = 1,
    redundant: bool = False,
    taps: int | None = None,
    rng: np.random.Generator | None = None,
) -> CipherModel:
    """Tabulate one of the cipher families used by the entropy lab.

    Args:
        kind: ``one-time-pad`` (key bit ``i mod |K|`` XORed onto bit ``i``),
            ``lfsr-xor`` (LFSR keystream XOR, every seed incl. zero is a key),
            ``alpha-eta-discretized`` (ciphertext = heterodyne phase sector,
            or the exact state index when ``noiseless``), ``random-table``.
        key_bits: key length in bits; key alphabet has ``2**key_bits`` values.
        length: number of tabulated positions (LFSR-based and random tables).
        randomization: homophones per plaintext symbol for ``random-table``.
        redundant: for ``random-table``, pair up keys so keys ``2j`` and
            ``2j+1`` share one table (redundant key use).
    """
    if key_bits < 1:
        raise ValueError(f"key_bits must be positive, got {key_bits}")
    n_keys = 1 << key_bits
    if kind == "one-time-pad":
        keys = np.arange(n_keys)
        stream = (keys[:, None] >> np.arange(key_bits)[None, :]) & 1
        return CipherModel(kind, _xor_tables(stream), periodic=True, info={"key_bits": key_bits})
    if kind == "lfsr-xor":
        t = LfsrSpec(key_bits, 1, taps).taps
        stream = np.stack([lfsr_bits(key_bits, t, k, length) for k in range(n_keys)]).astype(np.int64)
        return CipherModel(kind, _xor_tables(stream), info={"key_bits": key_bits, "taps": t})
    if kind == "alpha-eta-discretized":
        params = AlphaEtaParams(M, photons)
        bases = key_basis_table(key_bits, M, length, taps)  # (keys, positions)
        q = np.eye(M)[0] if noiseless else sector_probabilities(photons, M)
        tab = np.zeros((length, n_keys, 2, M))
        shift = (np.arange(M)[None, :] - np.arange(M)[:, None]) % M  # shift[m, j] = j - m
        state_rows = q[shift]  # row m: p(sector j | state m)
        for b in (0, 1):
            m = map_to_state(bases, b, M)  # (keys, positions)
            tab[:, :, b, :] = state_rows[m.T]
        return CipherModel(
            kind,
            tab,
            exact_decryption=noiseless,
            info={"key_bits": key_bits, "M": params.M, "S": params.S, "noiseless": noiseless},
        )
    if kind == "random-table":
        if rng is None:
            raise ValueError("random-table cipher needs a randomness stream")
        if alphabet < 2 or randomization < 1:
            raise ValueError("alphabet must be >= 2 and randomization >= 1")
        c = alphabet * randomization
        distinct = n_keys // 2 if redundant else n_keys
        tab = np.zeros((length, distinct, alphabet, c))
        for i in range(length):
            for k in range(distinct):
                perm = rng.permutation(c).reshape(alphabet, randomization)
                weights = rng.dirichlet(np.ones(randomization), size=alphabet) if randomization > 1 else np.ones((alphabet, 1))
                for x in range(alphabet):
                    tab[i, k, x, perm[x]] = weights[x]
        if redundant:
            tab = np.repeat(tab, 2, axis=1)
        return CipherModel(
            kind,
            tab,
            periodic=True,
            info={"key_bits": key_bits, "alphabet": alphabet, "randomization": randomization, "redundant": redundant},
        )
    raise ValueError(f"unknown cipher kind {kind!r}; expected one of {CIPHER_KINDS}")
