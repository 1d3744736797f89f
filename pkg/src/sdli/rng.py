"""Address-keyed random streams.

A stream is identified by ``(seed, run, path, period, tag)``. Each address
maps to its own Philox generator through ``SeedSequence.spawn_key``, so the
draws for one address never depend on how many other addresses were used or
in which order they were evaluated.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np


class Tag(IntEnum):
    DEMAND = 0
    SUPPLY_STATE = 1
    SUPPLY_FRACTION = 2
    SPOILAGE = 3
    PARAM_DRAW = 4
    # blocks of sample paths drawn inside the lookahead policy
    LOOKAHEAD_DEMAND = 10
    LOOKAHEAD_SUPPLY_STATE = 11
    LOOKAHEAD_SUPPLY_FRACTION = 12
    LOOKAHEAD_SPOILAGE = 13


@dataclass(frozen=True)
class RngStream:
    seed: int
    run: int = 0
    path: int = 0
    period: int = 0
    tag: Tag = Tag.DEMAND

    def __post_init__(self):
        for name in ("seed", "run", "path", "period"):
            if getattr(self, name) < 0:
                raise ValueError(f"stream {name} must be non-negative")

    def at(self, **changes) -> "RngStream":
        return replace(self, **changes)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            self.seed, spawn_key=(self.run, self.path, self.period, int(self.tag))
        )
        return np.random.Generator(np.random.Philox(ss))

    def uniform(self, size=None):
        return self.generator().random(size)
