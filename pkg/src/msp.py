"""
Monotone span programs: qualification, SHARE, reconstruction and the
multiplication property, on top of a small exact linear-algebra kernel.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    DimensionMismatch,
    FieldTooSmallForPoints,
    InvalidMsp,
    MissingShare,
    PlayerOutOfRange,
    Unqualified,
)
from src.field import FieldElement, FieldSpec, dot

logger = logging.getLogger(__name__)

Vector = Tuple[FieldElement, ...]


def solve_linear(spec: FieldSpec, A: Sequence[Sequence], b: Sequence) -> Optional[Vector]:
    """
    Solve A x = b over GF(q).

    The augmented matrix is brought to reduced row echelon form; free
    variables are set to 0, so the returned solution is the same on every run.
    Returns None when the system is inconsistent.
    """
    rows = len(A)
    if len(b) != rows:
        raise DimensionMismatch(f"A has {rows} rows but b has {len(b)} entries")
    cols = len(A[0]) if rows else 0
    if any(len(row) != cols for row in A):
        raise DimensionMismatch("ragged matrix")

    if rows == 0:
        return ()
    if cols == 0:
        return () if all(int(v) == 0 for v in b) else None

    GF = spec.galois_field()
    augmented = GF([[int(v) for v in row] + [int(rhs)] for row, rhs in zip(A, b)])
    reduced = augmented.row_reduce(ncols=cols)

    solution = [0] * cols
    for row in reduced:
        pivots = np.flatnonzero(row[:cols])
        if pivots.size == 0:
            if int(row[cols]) != 0:
                return None
            continue
        solution[int(pivots[0])] = int(row[cols])
    return spec.vector(solution)


@dataclass(frozen=True)
class ExtendedSecret:
    """a_* = (a, rho_2, ..., rho_e)"""

    coords: Vector

    @property
    def secret(self) -> FieldElement:
        return self.coords[0]

    def __add__(self, other: "ExtendedSecret") -> "ExtendedSecret":
        return ExtendedSecret(tuple(x + y for x, y in zip(self.coords, other.coords)))

    def scale(self, factor: FieldElement) -> "ExtendedSecret":
        return ExtendedSecret(tuple(x * factor for x in self.coords))


@dataclass(frozen=True)
class Msp:
    field: FieldSpec
    matrix: Tuple[Vector, ...]
    owners: Tuple[int, ...]
    player_count: int

    def __post_init__(self):
        d = len(self.matrix)
        if d == 0:
            raise InvalidMsp("matrix has no rows")
        e = len(self.matrix[0])
        if e < 1 or any(len(row) != e for row in self.matrix):
            raise InvalidMsp("matrix rows must all have the same positive length")
        if d < e:
            raise InvalidMsp(f"need d >= e, got d={d}, e={e}")
        if len(self.owners) != d:
            raise InvalidMsp(f"owners has {len(self.owners)} entries for {d} rows")
        if self.player_count < 1 or d < self.player_count:
            raise InvalidMsp(f"need d >= n >= 1, got d={d}, n={self.player_count}")
        if any(not 0 <= p < self.player_count for p in self.owners):
            raise InvalidMsp("row owner outside the player range")
        if set(self.owners) != set(range(self.player_count)):
            raise InvalidMsp("row-owner map is not surjective: every player needs a row")
        for row in self.matrix:
            for entry in row:
                if entry.spec.modulus != self.field.modulus:
                    raise InvalidMsp("matrix entry outside the MSP field")

    @classmethod
    def from_ints(cls, q: int, rows: Sequence[Sequence[int]], owners: Sequence[int],
                  player_count: Optional[int] = None) -> "Msp":
        spec = FieldSpec(q)
        n = player_count if player_count is not None else (max(owners) + 1 if owners else 0)
        return cls(spec, tuple(spec.vector(r) for r in rows), tuple(owners), n)

    @property
    def d(self) -> int:
        return len(self.matrix)

    @property
    def e(self) -> int:
        return len(self.matrix[0])

    @property
    def players(self) -> range:
        return range(self.player_count)

    @cached_property
    def _rows_by_player(self) -> Dict[int, Tuple[int, ...]]:
        rows: Dict[int, List[int]] = {p: [] for p in range(self.player_count)}
        for l, owner in enumerate(self.owners):
            rows[owner].append(l)
        return {p: tuple(r) for p, r in rows.items()}

    def rows_of(self, player: int) -> Tuple[int, ...]:
        self._check_players([player])
        return self._rows_by_player[player]

    def rows_of_set(self, players: Iterable[int]) -> Tuple[int, ...]:
        chosen = set(players)
        self._check_players(chosen)
        return tuple(l for l, owner in enumerate(self.owners) if owner in chosen)

    def target(self) -> Vector:
        return (self.field.one,) + (self.field.zero,) * (self.e - 1)

    def apply(self, coords: Sequence[FieldElement]) -> Vector:
        """M * coords"""
        q = self.field.modulus
        values = [int(c) for c in coords]
        return tuple(
            FieldElement(sum(m.value * v for m, v in zip(row, values)) % q, self.field)
            for row in self.matrix
        )

    def _check_players(self, players: Iterable[int]):
        for p in players:
            if not 0 <= p < self.player_count:
                raise PlayerOutOfRange(f"player {p} outside 0..{self.player_count - 1}")

    def __repr__(self) -> str:
        return f"Msp(GF({self.field.modulus}), d={self.d}, e={self.e}, n={self.player_count})"


@dataclass(frozen=True)
class ShareVector:
    """Shares indexed by row; None marks a row that is withheld"""

    msp: Msp
    entries: Tuple[Optional[FieldElement], ...]

    def restrict(self, players: Iterable[int]) -> "ShareVector":
        keep = set(self.msp.rows_of_set(players))
        return ShareVector(self.msp, tuple(v if l in keep else None for l, v in enumerate(self.entries)))

    def present_players(self) -> FrozenSet[int]:
        return frozenset(
            p for p in self.msp.players
            if all(self.entries[l] is not None for l in self.msp.rows_of(p))
        )

    def rows(self, players: Iterable[int]) -> Vector:
        values = []
        for l in self.msp.rows_of_set(players):
            if self.entries[l] is None:
                raise MissingShare(f"row {l} of player {self.msp.owners[l]} is missing")
            values.append(self.entries[l])
        return tuple(values)


def qualified(msp: Msp, players: Iterable[int]) -> bool:
    chosen = frozenset(players)
    msp._check_players(chosen)
    return _reconstruction_vector(msp, chosen) is not None


def reconstruction_vector(msp: Msp, players: Iterable[int]) -> Optional[Vector]:
    """lambda with lambda^T M_B = epsilon, indexed by the rows of B in row order"""
    chosen = frozenset(players)
    msp._check_players(chosen)
    return _reconstruction_vector(msp, chosen)


@lru_cache(maxsize=4096)
def _reconstruction_vector(msp: Msp, players: FrozenSet[int]) -> Optional[Vector]:
    rows = msp.rows_of_set(players)
    if not rows:
        return None
    transposed = [[msp.matrix[l][j] for l in rows] for j in range(msp.e)]
    return solve_linear(msp.field, transposed, msp.target())


def smallest_qualified(msp: Msp, candidates: Iterable[int]) -> Optional[Tuple[int, ...]]:
    """Lexicographically smallest qualified subset of `candidates`"""
    pool = sorted(set(candidates))
    subsets = []
    for size in range(1, len(pool) + 1):
        subsets.extend(itertools.combinations(pool, size))
    for subset in sorted(subsets):
        if qualified(msp, subset):
            return subset
    return None


def share(msp: Msp, a: FieldElement, randomness: Optional[Sequence[FieldElement]] = None,
          rng=None) -> Tuple[ExtendedSecret, ShareVector]:
    """SHARE: alpha = M a_* for a_* = (a, rho_2, ..., rho_e)"""
    spec = msp.field
    if randomness is None:
        if rng is None:
            raise ValueError("either randomness or a random stream is required")
        randomness = rng.vector(spec, msp.e - 1)
    if len(randomness) != msp.e - 1:
        raise DimensionMismatch(f"need {msp.e - 1} random coordinates, got {len(randomness)}")
    a_star = ExtendedSecret((spec(int(a)),) + tuple(spec(int(r)) for r in randomness))
    return a_star, ShareVector(msp, msp.apply(a_star.coords))


def reconstruct(msp: Msp, shares: ShareVector, players: Optional[Iterable[int]] = None) -> FieldElement:
    chosen = frozenset(players) if players is not None else shares.present_players()
    coefficients = reconstruction_vector(msp, chosen)
    if coefficients is None:
        raise Unqualified(f"players {sorted(chosen)} cannot reconstruct")
    return dot(coefficients, shares.rows(chosen))


def check_row(msp: Msp, a_star: ExtendedSecret, l: int, value: FieldElement) -> bool:
    if not 0 <= l < msp.d:
        raise IndexError(f"row {l} outside 0..{msp.d - 1}")
    return dot(msp.matrix[l], a_star.coords) == value


@lru_cache(maxsize=128)
def recombination_vector(msp: Msp) -> Optional[Vector]:
    """
    r with sum_i r_i M_ij M_ik = 1 if j = k = 0 else 0, i.e.
    <r, (M b) * (M b')> = b_1 b'_1 for all b, b'. None when the MSP has no multiplication.
    """
    spec = msp.field
    constraints = []
    rhs = []
    for j in range(msp.e):
        for k in range(msp.e):
            constraints.append([row[j] * row[k] for row in msp.matrix])
            rhs.append(spec.one if j == k == 0 else spec.zero)
    return solve_linear(spec, constraints, rhs)


def has_multiplication(msp: Msp) -> bool:
    return recombination_vector(msp) is not None


def threshold_msp(n: int, t: int, q: int) -> Msp:
    """Vandermonde MSP: row i = (1, x_i, ..., x_i^t) with x_i = i + 1, owned by player i"""
    if not 0 <= t < n:
        raise InvalidMsp(f"need 0 <= t < n, got t={t}, n={n}")
    spec = FieldSpec(q)
    if q <= n:
        raise FieldTooSmallForPoints(f"GF({q}) has too few points for {n} players")
    rows = tuple(spec.vector(pow(i + 1, j, q) for j in range(t + 1)) for i in range(n))
    return Msp(spec, rows, tuple(range(n)), n)
