"""
Відтворювані потоки випадкових чисел.

Потік визначається парою (seed, stream_id) і не залежить від порядку
виконання чи кількості робочих процесів: реплікація r завжди отримує
stream_id = r.
"""

from typing import Tuple

import numpy as np

MASK64 = (1 << 64) - 1


class RngStream:
    """Потік PCG64, ключований (seed, stream_id, *substream)."""

    def __init__(self, seed: int, stream_id: int = 0, substream: Tuple[int, ...] = ()):
        if not (0 <= seed <= MASK64) or not (0 <= stream_id <= MASK64):
            raise ValueError("seed та stream_id мають бути 64-бітними беззнаковими")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.substream = tuple(int(s) for s in substream)
        sequence = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(self.stream_id,) + self.substream
        )
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def child(self, index: int) -> "RngStream":
        """Незалежний підпотік, детермінований індексом."""
        return RngStream(self.seed, self.stream_id, self.substream + (index,))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, substream={self.substream})"
