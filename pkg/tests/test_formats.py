import numpy as np
import pytest

from src.errors import ParseError
from src.formats import (
    load_circuit,
    parse_circuit,
    parse_msp,
    parse_msp_source,
    parse_structure,
    serialize_circuit,
    serialize_msp,
    serialize_structure,
    write_text,
)
from src.msp import threshold_msp
from src.structures import AdversaryStructure
from tests.test_circuit import example_circuit, random_circuit

CIRCUIT = """\
field 7
in x P0
in y P1
mul m x y
smul d 2 x
add o m d
out o
"""

MSP = """\
field 7
matrix 3 2
1 1
1 2
1 3
owners 0 1 2
"""


def test_circuit_text():
    assert parse_circuit(CIRCUIT) == example_circuit()
    assert serialize_circuit(example_circuit()) == CIRCUIT


def test_circuit_comments_and_blank_lines():
    text = "# product plus twice x\nfield 7\n\nin x P0   # owner\n" + CIRCUIT.split("\n", 2)[2]
    assert parse_circuit(text) == example_circuit()


@pytest.mark.parametrize("text, line, column", [
    ("field 7\nin x Q0\nout x\n", 2, 6),
    ("field 7\nin x P0\nneg y x\nout x\n", 3, 1),
    ("field 7\nin 9x P0\nout 9x\n", 2, 4),
    ("field 7\nin x P0\ncadd y two x\nout y\n", 3, 8),
    ("field x\n", 1, 7),
    ("field 18446744073709551629\nin x P0\nout x\n", 1, 7),
    ("", 1, 1),
])
def test_circuit_parse_errors(text, line, column):
    with pytest.raises(ParseError) as excinfo:
        parse_circuit(text, "c.txt")
    assert (excinfo.value.line, excinfo.value.column) == (line, column)
    assert str(excinfo.value).startswith(f"c.txt:{line}:{column}: ")


def test_invalid_circuit_becomes_a_parse_error():
    with pytest.raises(ParseError, match="used before it is assigned"):
        parse_circuit("field 7\nin x P0\nadd z x y\nout z\n")
    with pytest.raises(ParseError, match="not prime"):
        parse_circuit("field 9\nin x P0\nout x\n")


def test_msp_text():
    assert parse_msp(MSP) == threshold_msp(3, 1, 7)
    assert serialize_msp(threshold_msp(3, 1, 7)) == MSP


@pytest.mark.parametrize("text, line", [
    ("field 7\nmatrix 3 2\n1 1\n1 2 3\n1 3\nowners 0 1 2\n", 4),
    ("field 7\nmatrix 3 2\n1 1\n1 2\n1 3\nowners 0 1\n", 6),
    ("field 7\nmatrix 3 2\n1 1\n1 2\n1 3\nowners 0 1 2\nextra\n", 7),
    ("field 7\nmatrix 3 2\n1 1\n1 2\n1 3\nowners 0 0 2\n", 1),
    ("field 7\nmatrix 3 2\n1 1\n", 4),
    ("field 18446744073709551629\nmatrix 3 2\n1 1\n1 2\n1 3\nowners 0 1 2\n", 1),
])
def test_msp_parse_errors(text, line):
    with pytest.raises(ParseError) as excinfo:
        parse_msp(text)
    assert excinfo.value.line == line


def test_msp_sources(tmp_path):
    assert parse_msp_source("threshold:3,1,7") == threshold_msp(3, 1, 7)
    path = tmp_path / "m.txt"
    write_text(path, MSP)
    assert parse_msp_source(str(path)) == threshold_msp(3, 1, 7)
    for bad in ("threshold:3,1", "threshold:3,a,7", "threshold:3,3,7", "threshold:3,1,18446744073709551629",
                str(tmp_path / "missing.txt")):
        with pytest.raises(ParseError):
            parse_msp_source(bad)


def test_structure_text():
    threshold = AdversaryStructure.threshold(3, 1)
    assert parse_structure("players 3\n0\n1\n2\n") == threshold
    assert serialize_structure(threshold) == "players 3\n0\n1\n2\n"
    empty = parse_structure("players 3\n")
    assert empty.maximal_sets == (frozenset(),)
    assert serialize_structure(empty) == "players 3\n"


def test_structure_drops_non_maximal_sets():
    parsed = parse_structure("players 4\n0 1\n0\n2\n3\n")
    assert parsed.maximal_sets == (frozenset({2}), frozenset({3}), frozenset({0, 1}))


def test_structure_parse_errors():
    with pytest.raises(ParseError) as excinfo:
        parse_structure("players 3\n0 3\n")
    assert (excinfo.value.line, excinfo.value.column) == (2, 3)
    with pytest.raises(ParseError):
        parse_structure("people 3\n")


def test_load_circuit_reports_the_path(tmp_path):
    path = tmp_path / "bad.txt"
    write_text(path, "field 7\nin x P0\nbogus\n")
    with pytest.raises(ParseError) as excinfo:
        load_circuit(path)
    assert excinfo.value.source == str(path)
    assert excinfo.value.line == 3


def test_random_circuits_survive_serialization():
    rng = np.random.default_rng(11)
    for modulus in (7, 11, 2 ** 61 - 1):
        for n in (2, 3, 5):
            for _ in range(20):
                circuit = random_circuit(rng, n, modulus)
                assert parse_circuit(serialize_circuit(circuit)) == circuit


@pytest.mark.parametrize("n, t, q", [(3, 1, 7), (4, 1, 11), (5, 2, 11), (7, 3, 13)])
def test_threshold_msps_survive_serialization(n, t, q):
    msp = threshold_msp(n, t, q)
    assert parse_msp(serialize_msp(msp)) == msp


def test_random_structures_survive_serialization():
    rng = np.random.default_rng(5)
    for n in (2, 3, 4, 6):
        for _ in range(50):
            sets = [
                [p for p in range(n) if rng.integers(2)]
                for _ in range(int(rng.integers(1, 5)))
            ]
            structure = AdversaryStructure.from_sets(n, sets)
            assert parse_structure(serialize_structure(structure)) == structure
