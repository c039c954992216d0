"""Counter-based randomness and deterministic fan-out.

Block ``i`` of stream ``name`` always gets the generator seeded from
``(master_seed, hash(name), i)``, so results do not depend on how many worker
threads process the blocks.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

BLOCK_SIZE = 1 << 16
THREADS_ENV = "KCQLAB_THREADS"

T = TypeVar("T")


def stream_key(name: str) -> int:
    return int.from_bytes(hashlib.blake2b(name.encode(), digest_size=8).digest(), "little")


def block_rng(master_seed: int, stream: str, index: int) -> np.random.Generator:
    if not 0 <= master_seed < 2**64:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    seq = np.random.SeedSequence([master_seed & 0xFFFFFFFF, master_seed >> 32, stream_key(name=stream), index])
    return np.random.Generator(np.random.PCG64(seq))


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1


def block_sizes(total: int, block: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(total, block)
    return [block] * full + ([rest] if rest else [])


def fan_out(fn: Callable[[int], T], count: int) -> list[T]:
    """Evaluate ``fn(0..count-1)`` on up to ``thread_cap()`` threads, results in index order."""
    workers = min(thread_cap(), max(count, 1))
    if workers == 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def sample_blocks(
    master_seed: int,
    stream: str,
    total: int,
    draw: Callable[[np.random.Generator, int], np.ndarray],
    block: int = BLOCK_SIZE,
    axis: int = 0,
) -> np.ndarray:
    """Concatenate ``draw(rng_i, size_i)`` along ``axis`` over fixed-size blocks of ``total`` samples."""
    sizes: Sequence[int] = block_sizes(total, block)
    parts = fan_out(lambda i: draw(block_rng(master_seed, stream, i), sizes[i]), len(sizes))
    return np.concatenate(parts, axis=axis) if parts else np.empty(0)
