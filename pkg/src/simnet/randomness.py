"""
Seeded per-party random streams
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.field import FieldElement, FieldSpec

# numpy's integers() handles bounds up to this directly
_NATIVE_BOUND = 2 ** 62


class RandomStream:
    """Counter-based (Philox) stream of field elements, coins and subsets"""

    def __init__(self, seed: Optional[np.random.SeedSequence] = None):
        self.seed = seed if seed is not None else np.random.SeedSequence(0)
        self._gen = np.random.Generator(np.random.Philox(self.seed))

    @classmethod
    def split(cls, master_seed: int, count: int) -> List["RandomStream"]:
        return [cls(child) for child in np.random.SeedSequence(master_seed).spawn(count)]

    def describe(self) -> str:
        return f"{self.seed.entropy}:{','.join(map(str, self.seed.spawn_key))}"

    def _below(self, bound: int) -> int:
        if bound < 1:
            raise ValueError("bound must be positive")
        if bound <= _NATIVE_BOUND:
            return int(self._gen.integers(0, bound))
        # rejection sampling for large moduli
        bits = (bound - 1).bit_length()
        nbytes = (bits + 7) // 8
        mask = (1 << bits) - 1
        while True:
            candidate = int.from_bytes(self._gen.bytes(nbytes), "little") & mask
            if candidate < bound:
                return candidate

    def element(self, spec: FieldSpec) -> FieldElement:
        return FieldElement(self._below(spec.modulus), spec)

    def nonzero(self, spec: FieldSpec) -> FieldElement:
        return FieldElement(1 + self._below(spec.modulus - 1), spec)

    def vector(self, spec: FieldSpec, length: int) -> Tuple[FieldElement, ...]:
        return tuple(self.element(spec) for _ in range(length))

    def coin(self) -> int:
        return self._below(2)

    def subset(self, population: int, size: int) -> Tuple[int, ...]:
        """Uniform `size`-subset of range(population) from a Fisher-Yates prefix, sorted"""
        if not 0 <= size <= population:
            raise ValueError(f"cannot pick {size} of {population}")
        items = list(range(population))
        for i in range(size):
            j = i + self._below(population - i)
            items[i], items[j] = items[j], items[i]
        return tuple(sorted(items[:size]))


class ScriptedStream(RandomStream):
    """
    Stream that replays fixed values first, then falls back to its seed.
    Used to enumerate randomness exhaustively.
    """

    def __init__(self, elements: Sequence[int] = (), coins: Sequence[int] = (),
                 subsets: Sequence[Sequence[int]] = (), seed: Optional[np.random.SeedSequence] = None):
        super().__init__(seed)
        self._elements = list(elements)
        self._coins = list(coins)
        self._subsets = [tuple(s) for s in subsets]

    def element(self, spec: FieldSpec) -> FieldElement:
        if self._elements:
            return FieldElement(self._elements.pop(0), spec)
        return super().element(spec)

    def nonzero(self, spec: FieldSpec) -> FieldElement:
        if self._elements:
            value = self._elements.pop(0) % spec.modulus
            if value == 0:
                raise ValueError("scripted nonzero element is 0")
            return FieldElement(value, spec)
        return super().nonzero(spec)

    def coin(self) -> int:
        if self._coins:
            return self._coins.pop(0)
        return super().coin()

    def subset(self, population: int, size: int) -> Tuple[int, ...]:
        if self._subsets:
            return tuple(sorted(self._subsets.pop(0)))
        return super().subset(population, size)
