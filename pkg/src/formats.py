"""
Line-oriented text formats for circuits, MSPs and adversary structures.

Every format is UTF-8, one directive per line, with '#' starting a comment.
Parse errors carry the 1-based line and column of the offending token.
"""
import logging
import re
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

from src.circuit import Circuit, Gate, GateKind
from src.errors import ModulusTooLarge, ParseError, Q2MpcError
from src.field import check_modulus
from src.msp import Msp, threshold_msp
from src.structures import AdversaryStructure

logger = logging.getLogger(__name__)

# (line number, [(column, token), ...])
Line = Tuple[int, List[Tuple[int, str]]]

_WIRE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
_PLAYER = re.compile(r"^P(\d+)$")


def _lines(text: str) -> Iterator[Line]:
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", content)]
        if tokens:
            yield number, tokens


class _Reader:
    def __init__(self, text: str, source: Optional[str]):
        self.source = source
        self.lines = list(_lines(text))
        self.position = 0

    def error(self, message: str, line: Optional[int] = None, column: Optional[int] = None) -> ParseError:
        return ParseError(message, line, column, self.source)

    def next(self, what: str) -> Line:
        if self.position >= len(self.lines):
            last = self.lines[-1][0] + 1 if self.lines else 1
            raise self.error(f"unexpected end of input, expected {what}", last, 1)
        line = self.lines[self.position]
        self.position += 1
        return line

    def done(self) -> bool:
        return self.position >= len(self.lines)

    def integer(self, line: int, token: Tuple[int, str], what: str, minimum: Optional[int] = None) -> int:
        column, text = token
        try:
            value = int(text)
        except ValueError:
            raise self.error(f"{what} must be an integer, got {text!r}", line, column) from None
        if minimum is not None and value < minimum:
            raise self.error(f"{what} must be >= {minimum}, got {value}", line, column)
        return value

    def modulus(self, line: int, token: Tuple[int, str]) -> int:
        q = self.integer(line, token, "field modulus", minimum=2)
        try:
            return check_modulus(q)
        except ModulusTooLarge as e:
            raise self.error(str(e), line, token[0]) from e

    def keyword(self, line: Line, word: str, arity: int):
        number, tokens = line
        if tokens[0][1] != word:
            raise self.error(f"expected '{word}', got {tokens[0][1]!r}", number, tokens[0][0])
        if len(tokens) != arity + 1:
            column = tokens[min(len(tokens), arity + 1) - 1][0]
            raise self.error(f"'{word}' takes {arity} argument(s), got {len(tokens) - 1}", number, column)
        return tokens[1:]


def _wrap(reader: _Reader, line: int, build):
    """Turn validation errors of the domain types into parse errors at `line`"""
    try:
        return build()
    except ParseError:
        raise
    except (Q2MpcError, ValueError) as e:
        raise reader.error(str(e), line, 1) from e


# Circuits

_ARITY = {"in": 2, "cadd": 3, "smul": 3, "add": 3, "mul": 3, "out": 1}


def parse_circuit(text: str, source: Optional[str] = None) -> Circuit:
    reader = _Reader(text, source)
    header = reader.next("'field <q>'")
    (q_token,) = reader.keyword(header, "field", 1)
    q = reader.modulus(header[0], q_token)

    gates: List[Gate] = []
    while not reader.done():
        number, tokens = reader.next("a gate")
        column, op = tokens[0]
        if op not in _ARITY:
            raise reader.error(f"unknown directive {op!r}", number, column)
        args = reader.keyword((number, tokens), op, _ARITY[op])
        wire_tokens = [args[0]] + ([args[2]] if op in ("cadd", "smul") else list(args[1:]) if op in ("add", "mul") else [])
        for col, name in wire_tokens:
            if not _WIRE.match(name):
                raise reader.error(f"bad wire name {name!r}", number, col)
        if op == "in":
            match = _PLAYER.match(args[1][1])
            if not match:
                raise reader.error(f"expected a player like P0, got {args[1][1]!r}", number, args[1][0])
            gates.append(Gate(GateKind.INPUT, args[0][1], owner=int(match.group(1))))
        elif op == "out":
            gates.append(Gate(GateKind.OUTPUT, args[0][1]))
        elif op in ("cadd", "smul"):
            constant = reader.integer(number, args[1], "constant")
            gates.append(Gate(GateKind(op), args[0][1], (args[2][1],), constant=constant))
        else:
            gates.append(Gate(GateKind(op), args[0][1], (args[1][1], args[2][1])))
    last = reader.lines[-1][0] if reader.lines else 1
    return _wrap(reader, last, lambda: Circuit(q, tuple(gates)))


def serialize_circuit(circuit: Circuit) -> str:
    lines = [f"field {circuit.modulus}"] + [g.render() for g in circuit.gates]
    return "\n".join(lines) + "\n"


# Monotone span programs

def parse_msp(text: str, source: Optional[str] = None) -> Msp:
    reader = _Reader(text, source)
    header = reader.next("'field <q>'")
    (q_token,) = reader.keyword(header, "field", 1)
    q = reader.modulus(header[0], q_token)

    shape = reader.next("'matrix <d> <e>'")
    d_token, e_token = reader.keyword(shape, "matrix", 2)
    d = reader.integer(shape[0], d_token, "row count", minimum=1)
    e = reader.integer(shape[0], e_token, "column count", minimum=1)

    rows = []
    for _ in range(d):
        number, tokens = reader.next(f"a matrix row of {e} integers")
        if len(tokens) != e:
            raise reader.error(f"matrix row has {len(tokens)} entries, expected {e}", number, tokens[0][0])
        rows.append([reader.integer(number, t, "matrix entry") for t in tokens])

    owners_line = reader.next("'owners <p1> ... <pd>'")
    tokens = reader.keyword(owners_line, "owners", d)
    owners = [reader.integer(owners_line[0], t, "row owner", minimum=0) for t in tokens]
    if not reader.done():
        number, extra = reader.next("end of input")
        raise reader.error(f"unexpected {extra[0][1]!r} after the owners line", number, extra[0][0])
    return _wrap(reader, header[0], lambda: Msp.from_ints(q, rows, owners))


def serialize_msp(msp: Msp) -> str:
    lines = [f"field {msp.field.modulus}", f"matrix {msp.d} {msp.e}"]
    lines += [" ".join(str(int(v)) for v in row) for row in msp.matrix]
    lines.append("owners " + " ".join(str(p) for p in msp.owners))
    return "\n".join(lines) + "\n"


def parse_msp_source(spec: str) -> Msp:
    """`threshold:n,t,q` or the path of an MSP file"""
    if spec.startswith("threshold:"):
        parts = spec[len("threshold:"):].split(",")
        if len(parts) != 3:
            raise ParseError("expected threshold:n,t,q", source=spec)
        try:
            n, t, q = (int(p) for p in parts)
        except ValueError:
            raise ParseError("threshold parameters must be integers", source=spec) from None
        try:
            check_modulus(q)
            return threshold_msp(n, t, q)
        except Q2MpcError as e:
            raise ParseError(str(e), source=spec) from e
    return load_msp(spec)


# Adversary structures

def parse_structure(text: str, source: Optional[str] = None) -> AdversaryStructure:
    reader = _Reader(text, source)
    header = reader.next("'players <n>'")
    (n_token,) = reader.keyword(header, "players", 1)
    n = reader.integer(header[0], n_token, "player count", minimum=1)
    sets = []
    while not reader.done():
        number, tokens = reader.next("a maximal set")
        members = []
        for token in tokens:
            p = reader.integer(number, token, "player index", minimum=0)
            if p >= n:
                raise reader.error(f"player {p} outside 0..{n - 1}", number, token[0])
            members.append(p)
        sets.append(frozenset(members))
    if not sets:
        # only the empty set is tolerated
        sets.append(frozenset())
    return _wrap(reader, header[0], lambda: AdversaryStructure.from_sets(n, sets))


def serialize_structure(structure: AdversaryStructure) -> str:
    lines = [f"players {structure.player_count}"]
    # the empty set has no line of its own
    lines += [" ".join(str(p) for p in sorted(s)) for s in structure.maximal_sets if s]
    return "\n".join(lines) + "\n"


# Files

def _read(path: Union[str, Path]) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror}", source=str(path)) from e


def load_circuit(path: Union[str, Path]) -> Circuit:
    return parse_circuit(_read(path), str(path))


def load_msp(path: Union[str, Path]) -> Msp:
    return parse_msp(_read(path), str(path))


def load_structure(path: Union[str, Path]) -> AdversaryStructure:
    return parse_structure(_read(path), str(path))


def write_text(path: Union[str, Path], text: str):
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"wrote {path}")
