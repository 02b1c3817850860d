"""
Stochastics
Seedable counter-based Gaussian streams and Brownian increments.

Every stream is a Philox generator keyed by (master_seed, stream_id, substream)
through a SeedSequence, so any particle block can be drawn independently of
how many others are drawn and in which order.
"""
from dataclasses import dataclass, replace
from enum import IntEnum
import logging
import math
from typing import Callable

import numpy as np

from .parallel import thread_map

logger = logging.getLogger(__name__)

UINT64_MAX = 2**64 - 1

# Particles are drawn in fixed-width blocks; a block always draws its full
# width so particle i's values never depend on the ensemble size.
PARTICLE_BLOCK = 256


class Purpose(IntEnum):
    """High word of a substream; the low word is a counter (epoch, step, ...)"""
    TRAINING = 1
    FEATURES = 2
    EVALUATION = 3
    PROBE = 4
    ORACLE = 5


class Family(IntEnum):
    """High word of a particle-block stream id"""
    BROWNIAN = 0
    INITIAL = 1
    NESTED = 2


def substream(purpose: Purpose, counter: int = 0) -> int:
    if not 0 <= counter < 2**32:
        raise ValueError(f"substream counter out of range: {counter}")
    return (int(purpose) << 32) | counter


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_id: int = 0
    substream: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id", "substream"):
            value = getattr(self, name)
            if not 0 <= value <= UINT64_MAX:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def with_stream(self, stream_id: int) -> "SeedSpec":
        return replace(self, stream_id=stream_id)

    def for_purpose(self, purpose: Purpose, counter: int = 0) -> "SeedSpec":
        return replace(self, substream=substream(purpose, counter))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence([self.master_seed, self.stream_id, self.substream])
        return np.random.Generator(np.random.Philox(seq))


def gaussian_matrix(seed: SeedSpec, rows: int, cols: int) -> np.ndarray:
    """rows x cols i.i.d. standard normals, bit-reproducible for a fixed seed"""
    if rows < 1 or cols < 1:
        raise ValueError(f"gaussian_matrix needs rows, cols >= 1, got {rows}x{cols}")
    return seed.generator().standard_normal((rows, cols))


def draw_blocks(seed: SeedSpec, family: Family, M: int,
                draw: Callable[[np.random.Generator, int], np.ndarray],
                threads: int = 1) -> np.ndarray:
    """
    Stack per-particle draws for M particles.

    Block b is drawn from stream (family << 32 | b) of the seed's substream;
    `draw(gen, PARTICLE_BLOCK)` must return an array with PARTICLE_BLOCK rows.
    Particle i is row (i mod PARTICLE_BLOCK) of block (i div PARTICLE_BLOCK).
    """
    if M < 1:
        raise ValueError(f"need at least one particle, got M={M}")
    n_blocks = -(-M // PARTICLE_BLOCK)

    def one(block: int) -> np.ndarray:
        gen = seed.with_stream((int(family) << 32) | block).generator()
        rows = np.asarray(draw(gen, PARTICLE_BLOCK))
        hi = min(PARTICLE_BLOCK, M - block * PARTICLE_BLOCK)
        return rows[:hi]

    return np.concatenate(thread_map(one, range(n_blocks), threads), axis=0)


@dataclass(frozen=True)
class BrownianIncrements:
    values: np.ndarray  # (M, N, m), units sqrt(time)
    dt: float

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ValueError(f"increments must be M x N x m, got shape {self.values.shape}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def shape(self):
        return self.values.shape

    def step(self, n: int) -> np.ndarray:
        return self.values[:, n, :]


def brownian_increments(seed: SeedSpec, M: int, N: int, m: int, dt: float,
                        threads: int = 1) -> BrownianIncrements:
    """i.i.d. N(0, dt) increments for M particles, N steps, m Brownian dimensions"""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if N < 1 or m < 1:
        raise ValueError(f"brownian_increments needs N, m >= 1, got N={N}, m={m}")

    scale = math.sqrt(dt)
    values = draw_blocks(seed, Family.BROWNIAN, M,
                         lambda gen, rows: gen.standard_normal((rows, N, m)), threads)
    return BrownianIncrements(values=values * scale, dt=dt)
