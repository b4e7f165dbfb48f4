import pytest

from config.run_config import RunConfig
from src.commands import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_PROTOCOL,
    EXIT_STRUCTURE,
    binomial_band,
    cmd_check,
    cmd_gen_msp,
    cmd_gen_structure,
    cmd_run,
    exit_code_for,
    resolve_inputs,
    run_trials,
    trial_seeds,
)
from src.errors import DealerCorrupt, ParseError, StructureViolation
from src.formats import serialize_circuit, write_text
from tests.test_circuit import example_circuit
from tests.test_formats import MSP


@pytest.fixture
def circuit_file(tmp_path):
    path = tmp_path / "circuit.txt"
    write_text(path, serialize_circuit(example_circuit()))
    return str(path)


def test_check_threshold_premises():
    report, code = cmd_check("threshold:3,1,7")
    assert code == EXIT_OK
    for line in ("is_q2: yes", "is_q3: no", "rejected_by: yes", "has_multiplication: yes",
                 "recombination: (3,4,1)", "premises: ok"):
        assert line in report.splitlines()


def test_check_without_multiplication_fails():
    report, code = cmd_check("threshold:4,2,7")
    assert code == EXIT_CHECK_FAILED
    assert "has_multiplication: no" in report
    assert "premises: FAILED" in report


def test_check_with_a_structure_file(tmp_path):
    path = tmp_path / "s.txt"
    write_text(path, "players 3\n0 1\n2\n")
    report, code = cmd_check("threshold:3,1,7", str(path), verbose=True, settings={"default_k": 8})
    assert code == EXIT_CHECK_FAILED
    assert "is_q2: no" in report and "rejected_by: no" in report
    assert "  {0,1}" in report and "setting default_k: 8" in report


def test_generators(tmp_path):
    assert cmd_gen_msp(3, 1, 7) == (MSP, EXIT_OK)
    assert cmd_gen_structure(3, 1) == ("players 3\n0\n1\n2\n", EXIT_OK)
    target = tmp_path / "out.txt"
    text, code = cmd_gen_msp(3, 1, 7, str(target))
    assert code == EXIT_OK and target.read_text(encoding="utf-8") == MSP


def test_resolve_inputs():
    circuit = example_circuit()
    assert resolve_inputs(circuit, {"P0": 4}) == {"x": 4, "y": 0}
    assert resolve_inputs(circuit, {"y": 5}) == {"x": 0, "y": 5}
    for bad in ({"z": 1}, {"P2": 1}):
        with pytest.raises(ParseError):
            resolve_inputs(circuit, bad)


def test_trial_seeds_are_stable_and_distinct():
    seeds = trial_seeds(7, 5)
    assert seeds == trial_seeds(7, 5)
    assert len(set(seeds)) == 5
    assert trial_seeds(7, 2) == seeds[:2]


def test_binomial_band():
    mean, low, high = binomial_band(2000, 2 ** -8)
    assert mean == pytest.approx(7.8125)
    assert low == 0.0
    assert high == pytest.approx(7.8125 + 3 * (2000 * 2 ** -8 * (1 - 2 ** -8)) ** 0.5)


def test_honest_run_report(circuit_file, tmp_path):
    report_path = tmp_path / "report.txt"
    config = RunConfig(circuit=circuit_file, msp="threshold:3,1,7", inputs="x=3,y=2", k=1, trials=2,
                       report=str(report_path))
    report, code = cmd_run(config)
    assert code == EXIT_OK
    lines = report.splitlines()
    assert lines[0].startswith("run circuit=")
    assert sum(1 for line in lines if "outputs o=5 expected o=5" in line) == 2
    assert "  undetected cheats: 0" in lines
    assert "  within band: yes" in lines
    assert report_path.read_text(encoding="utf-8") == report
    assert cmd_run(config)[0] == report


def test_run_rejects_a_corrupt_set_outside_the_structure(circuit_file):
    config = RunConfig(circuit=circuit_file, msp="threshold:3,1,7", k=1,
                       adversary={"strategy": "honest", "corrupt": "0,1"})
    with pytest.raises(StructureViolation):
        run_trials(config)


@pytest.mark.slow
def test_workers_do_not_change_the_report(circuit_file):
    base = dict(circuit=circuit_file, msp="threshold:3,1,7", inputs="P0=1,P1=6", k=1, trials=3)
    sequential = cmd_run(RunConfig(**base, workers=1))
    parallel = cmd_run(RunConfig(**base, workers=3))
    assert sequential == parallel


def test_exit_codes():
    assert exit_code_for(StructureViolation("x")) == EXIT_STRUCTURE
    assert exit_code_for(DealerCorrupt(1)) == EXIT_PROTOCOL
    assert exit_code_for(ParseError("x")) == EXIT_PARSE
    assert exit_code_for(RuntimeError("x")) == EXIT_PROTOCOL


def test_check_rejects_a_structure_of_another_player_count(tmp_path):
    path = tmp_path / "four.txt"
    write_text(path, "players 4\n0\n1\n2\n3\n")
    with pytest.raises(StructureViolation, match="MSP has 3 players, structure has 4"):
        cmd_check("threshold:3,1,7", str(path))
