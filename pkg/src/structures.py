"""
Adversary structures given by their maximal sets
"""
import itertools
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Tuple

from src.errors import PlayerCountMismatch, PlayerOutOfRange
from src.msp import Msp, qualified

logger = logging.getLogger(__name__)

PlayerSet = FrozenSet[int]

# induced_by enumerates all 2^n subsets
MAX_INDUCED_PLAYERS = 12


@dataclass(frozen=True)
class AdversaryStructure:
    player_count: int
    maximal_sets: Tuple[PlayerSet, ...]

    def __post_init__(self):
        for s in self.maximal_sets:
            _check_players(s, self.player_count)
        for a, b in itertools.permutations(self.maximal_sets, 2):
            if a <= b:
                raise ValueError(f"maximal sets must form an antichain: {sorted(a)} is inside {sorted(b)}")

    @classmethod
    def from_sets(cls, player_count: int, sets: Iterable[Iterable[int]]) -> "AdversaryStructure":
        """Reduce any family of sets to its antichain of maximal sets"""
        family = {frozenset(s) for s in sets}
        for s in family:
            _check_players(s, player_count)
        maximal = _maximal(family)
        dropped = len(family) - len(maximal)
        if dropped:
            logger.warning(f"Dropped {dropped} non-maximal set(s) from the adversary structure")
        return cls(player_count, maximal)

    @classmethod
    def threshold(cls, n: int, t: int) -> "AdversaryStructure":
        """All sets of at most t players out of n"""
        if not 0 <= t <= n:
            raise ValueError(f"need 0 <= t <= n, got t={t}, n={n}")
        return cls(n, tuple(frozenset(c) for c in itertools.combinations(range(n), t)))

    @classmethod
    def induced_by(cls, msp: Msp) -> "AdversaryStructure":
        """Maximal unqualified sets of an MSP"""
        n = msp.player_count
        if n > MAX_INDUCED_PLAYERS:
            raise ValueError(f"cannot enumerate the induced structure of {n} players")
        unqualified = [
            frozenset(c)
            for size in range(n + 1)
            for c in itertools.combinations(range(n), size)
            if not qualified(msp, c)
        ]
        return cls(n, _maximal(set(unqualified)))

    @property
    def players(self) -> PlayerSet:
        return frozenset(range(self.player_count))

    def __repr__(self) -> str:
        sets = ", ".join("{" + ",".join(map(str, sorted(s))) + "}" for s in self.maximal_sets)
        return f"AdversaryStructure(n={self.player_count}, [{sets}])"


def _maximal(family) -> Tuple[PlayerSet, ...]:
    maximal = [s for s in family if not any(s < other for other in family)]
    return tuple(sorted(maximal, key=lambda s: (len(s), sorted(s))))


def _check_players(players: Iterable[int], n: int):
    for p in players:
        if not 0 <= p < n:
            raise PlayerOutOfRange(f"player {p} outside 0..{n - 1}")


def contains(structure: AdversaryStructure, players: Iterable[int]) -> bool:
    chosen = frozenset(players)
    _check_players(chosen, structure.player_count)
    return any(chosen <= s for s in structure.maximal_sets)


def is_qk(structure: AdversaryStructure, k: int) -> bool:
    if k < 1:
        raise ValueError("k must be positive")
    everyone = structure.players
    for combo in itertools.combinations_with_replacement(structure.maximal_sets, k):
        if frozenset().union(*combo) == everyone:
            return False
    return True


def rejected_by(structure: AdversaryStructure, msp: Msp) -> bool:
    if msp.player_count != structure.player_count:
        raise PlayerCountMismatch(
            f"MSP has {msp.player_count} players, structure has {structure.player_count}"
        )
    return not any(qualified(msp, s) for s in structure.maximal_sets)
