import itertools
import logging

import numpy as np
import pytest

from src.errors import PlayerCountMismatch, PlayerOutOfRange
from src.msp import Msp, threshold_msp
from src.structures import AdversaryStructure, contains, is_qk, rejected_by


def test_threshold_structure_is_q2_but_not_q3(structure3):
    assert set(structure3.maximal_sets) == {frozenset({0}), frozenset({1}), frozenset({2})}
    assert is_qk(structure3, 2)
    assert not is_qk(structure3, 3)


def test_two_sets_covering_everyone_break_q2():
    structure = AdversaryStructure.from_sets(4, [{0, 1}, {2, 3}])
    assert not is_qk(structure, 2)
    assert is_qk(structure, 1)


def test_contains_subsets_of_maximal_sets(structure3):
    assert contains(structure3, [])
    assert contains(structure3, [1])
    assert not contains(structure3, [0, 2])
    with pytest.raises(PlayerOutOfRange):
        contains(structure3, [3])


def test_from_sets_keeps_only_maximal_sets(caplog):
    with caplog.at_level(logging.WARNING, logger="src.structures"):
        structure = AdversaryStructure.from_sets(4, [{0}, {0, 1}, {2}, set()])
    assert structure.maximal_sets == (frozenset({2}), frozenset({0, 1}))
    assert "Dropped 2" in caplog.text


def test_maximal_sets_must_be_an_antichain():
    with pytest.raises(ValueError):
        AdversaryStructure(3, (frozenset({0}), frozenset({0, 1})))
    with pytest.raises(PlayerOutOfRange):
        AdversaryStructure.from_sets(3, [{5}])


def test_induced_structure_of_threshold_msp(msp3, structure3):
    induced = AdversaryStructure.induced_by(msp3)
    assert set(induced.maximal_sets) == set(structure3.maximal_sets)
    assert rejected_by(structure3, msp3)


def test_induced_structure_of_a_non_threshold_msp():
    # qualified: anything containing 2, or {0, 1}
    msp = Msp.from_ints(5, [[0, 1], [1, 4], [1, 0]], [0, 1, 2])
    induced = AdversaryStructure.induced_by(msp)
    assert set(induced.maximal_sets) == {frozenset({0}), frozenset({1})}
    assert is_qk(induced, 2)


def test_rejected_by_detects_accepted_sets(msp3):
    too_strong = AdversaryStructure.threshold(3, 2)
    assert not rejected_by(too_strong, msp3)
    with pytest.raises(PlayerCountMismatch):
        rejected_by(AdversaryStructure.threshold(4, 1), msp3)


def test_threshold_five_two_is_q2_and_matches_its_msp():
    structure = AdversaryStructure.threshold(5, 2)
    assert is_qk(structure, 2)
    assert rejected_by(structure, threshold_msp(5, 2, 11))


def test_is_qk_needs_positive_k(structure3):
    with pytest.raises(ValueError):
        is_qk(structure3, 0)


def _subsets(n):
    return [frozenset(c) for size in range(n + 1) for c in itertools.combinations(range(n), size)]


def _structures():
    for n in (1, 2, 3):
        subsets = _subsets(n)
        for mask in range(1, 2 ** len(subsets)):
            yield AdversaryStructure.from_sets(n, [s for i, s in enumerate(subsets) if mask >> i & 1])
    rng = np.random.default_rng(4)
    for n in (4, 5):
        for t in range(n + 1):
            yield AdversaryStructure.threshold(n, t)
        subsets = _subsets(n)
        for _ in range(100):
            picks = rng.integers(len(subsets), size=int(rng.integers(1, 6)))
            yield AdversaryStructure.from_sets(n, [subsets[int(i)] for i in picks])


def test_contains_is_monotone_and_q2_means_no_complementary_pair():
    for structure in _structures():
        subsets = _subsets(structure.player_count)
        inside = {s: contains(structure, s) for s in subsets}
        for a, b in itertools.product(subsets, repeat=2):
            if a <= b and inside[b]:
                assert inside[a], structure
        everyone = structure.players
        split = any(inside[a] and inside[everyone - a] for a in subsets)
        assert is_qk(structure, 2) == (not split), structure
