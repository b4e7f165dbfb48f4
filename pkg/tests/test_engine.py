import numpy as np
import pytest

from src.circuit import Circuit, add, evaluate_plain, input_gate, mul, output
from src.errors import InvalidCircuit, PlayerCountMismatch, StructureViolation
from src.engine_runner import run_mpc
from src.msp import threshold_msp
from src.simnet import AdversaryScript
from src.structures import AdversaryStructure
from tests.test_circuit import example_circuit, random_circuit, random_inputs

INPUTS = {"x": 3, "y": 2}


def test_honest_run_matches_plain_evaluation(msp3):
    outcome = run_mpc(example_circuit(), INPUTS, msp3, k=1)
    assert outcome.outputs == {"o": 5}
    assert outcome.restarts == 0
    assert outcome.disqualified == frozenset()
    assert outcome.bounded_checks > 0
    assert {"vss", "wss", "gic", "coin"} <= set(outcome.stats)


def test_runs_are_reproducible(msp3):
    first = run_mpc(example_circuit(), INPUTS, msp3, k=1, seed=3)
    again = run_mpc(example_circuit(), INPUTS, msp3, k=1, seed=3)
    other = run_mpc(example_circuit(), INPUTS, msp3, k=1, seed=4)
    assert first.digest == again.digest
    assert first.digest != other.digest
    assert other.outputs == first.outputs


def test_refused_conversion_restarts_without_the_cheater(msp3):
    circuit = Circuit(7, (
        input_gate("x", 0),
        input_gate("y", 1),
        input_gate("z", 2),
        mul("m", "x", "y"),
        add("o", "m", "z"),
        output("o"),
    ))
    inputs = {"x": 3, "y": 2, "z": 4}
    outcome = run_mpc(circuit, inputs, msp3, AdversaryScript.of([2], "refuse_conversion"), k=1)
    assert outcome.restarts == 1
    assert outcome.disqualified == frozenset({2})
    assert outcome.outputs == {w: int(v) for w, v in evaluate_plain(circuit, inputs).items()}
    assert outcome.transcript.annotations_of("engine.restart") == [(1, (2,))]


def test_caught_input_dealer_gets_a_default_input(msp3):
    defaulted = 0
    for seed in range(4):
        adversary = AdversaryScript.of([0], "inconsistent_vss_dealer", guess=False)
        outcome = run_mpc(example_circuit(), INPUTS, msp3, adversary, k=1, seed=seed)
        if "x" in outcome.defaulted:
            defaulted += 1
            assert 0 in outcome.disqualified
            assert outcome.outputs == {"o": 0}
    assert defaulted > 0


def test_corrupt_set_outside_the_structure_is_rejected(msp3):
    adversary = AdversaryScript.of([0, 1])
    with pytest.raises(StructureViolation):
        run_mpc(example_circuit(), INPUTS, msp3, adversary, k=1)
    outcome = run_mpc(example_circuit(), INPUTS, msp3, AdversaryScript.of([0, 1]), k=1, overpowered=True)
    assert outcome.outputs == {"o": 5}


def test_structure_must_be_q2_and_rejected(msp3):
    not_q2 = AdversaryStructure.from_sets(3, [{0}, {1}, {2}, {0, 1}])
    with pytest.raises(StructureViolation):
        run_mpc(example_circuit(), INPUTS, msp3, k=1, structure=not_q2)


def test_structure_of_another_player_count_is_a_violation(msp3):
    with pytest.raises(StructureViolation, match="structure has 4"):
        run_mpc(example_circuit(), INPUTS, msp3, k=1, structure=AdversaryStructure.threshold(4, 1))
    with pytest.raises(StructureViolation):
        run_mpc(example_circuit(), INPUTS, msp3, AdversaryScript.of([5]), k=1)


def test_player_caught_in_a_product_proof_does_not_force_a_restart_later(msp3):
    circuit = Circuit(7, (
        input_gate("x", 0),
        input_gate("y", 1),
        mul("p", "x", "y"),
        mul("q", "p", "x"),
        output("q"),
    ))
    expected = {w: int(v) for w, v in evaluate_plain(circuit, INPUTS).items()}
    caught = 0
    for seed in range(6):
        adversary = AdversaryScript.of([1], "wrong_product_dealer", row=1, guess=False)
        outcome = run_mpc(circuit, INPUTS, msp3, adversary, k=1, seed=seed)
        if 1 not in outcome.disqualified:
            continue
        caught += 1
        assert outcome.restarts == 0
        assert outcome.outputs == expected
        recovered = outcome.transcript.annotations_of("wss.recover")
        assert recovered and all(value is not None for _, _, value in recovered)
    assert caught > 0


def test_circuit_must_fit_the_msp(msp3):
    with pytest.raises(InvalidCircuit):
        run_mpc(example_circuit(11), INPUTS, msp3, k=1)
    circuit = Circuit(7, (input_gate("x", 3), output("x")))
    with pytest.raises(PlayerCountMismatch):
        run_mpc(circuit, {"x": 1}, msp3, k=1)


@pytest.mark.slow
def test_five_players_two_multiplications():
    msp = threshold_msp(5, 2, 11)
    circuit = Circuit(11, (
        input_gate("a", 0),
        input_gate("b", 3),
        mul("p", "a", "b"),
        mul("q", "p", "a"),
        output("q"),
    ))
    outcome = run_mpc(circuit, {"a": 4, "b": 5}, msp, k=2, seed=1)
    assert outcome.outputs == {"q": 3}


def _plain(circuit, inputs):
    return {w: int(v) for w, v in evaluate_plain(circuit, inputs).items()}


@pytest.mark.parametrize("n, circuits", [
    (3, 3),
    pytest.param(3, 100, marks=pytest.mark.slow),
    pytest.param(5, 100, marks=pytest.mark.slow),
])
def test_random_circuits_match_plain_evaluation(n, circuits):
    msp = threshold_msp(n, (n - 1) // 2, 11)
    rng = np.random.default_rng(n)
    for index in range(circuits):
        circuit = random_circuit(rng, n, 11)
        inputs = random_inputs(rng, circuit)
        outcome = run_mpc(circuit, inputs, msp, k=1, seed=index)
        assert outcome.outputs == _plain(circuit, inputs), circuit
        assert outcome.restarts == 0


@pytest.mark.slow
def test_restarts_keep_outputs_correct():
    circuit = Circuit(7, (
        input_gate("x", 0),
        input_gate("y", 1),
        input_gate("z", 2),
        mul("m", "x", "y"),
        mul("p", "m", "z"),
        add("o", "p", "x"),
        output("o"),
    ))
    inputs = {"x": 3, "y": 2, "z": 4}
    for seed in range(200):
        outcome = run_mpc(circuit, inputs, threshold_msp(3, 1, 7),
                          AdversaryScript.of([2], "refuse_conversion"), k=1, seed=seed)
        assert 1 <= outcome.restarts <= 3
        assert outcome.disqualified == frozenset({2})
        assert outcome.outputs == _plain(circuit, inputs)


@pytest.mark.slow
def test_view_of_a_player_without_inputs_does_not_reveal_them(msp3, view_values, assert_same_distribution):
    # (3, 2) and (1, 3) give the same output
    views = []
    for inputs in ({"x": 3, "y": 2}, {"x": 1, "y": 3}):
        pooled = {}
        for seed in range(20):
            outcome = run_mpc(example_circuit(), inputs, msp3, k=1, seed=seed)
            assert outcome.outputs == {"o": 5}
            view_values(outcome.transcript, [2], pooled)
        views.append(pooled)
    assert_same_distribution(*views)
