"""
Arithmetic circuits over K and their plain (single-party) evaluation
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

from src.errors import InvalidCircuit, UnassignedInput
from src.field import FieldElement, FieldSpec


class GateKind(str, Enum):
    INPUT = "in"
    CONST_ADD = "cadd"
    SCALAR_MUL = "smul"
    ADD = "add"
    MUL = "mul"
    OUTPUT = "out"


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    out: str
    args: Tuple[str, ...] = ()
    constant: Optional[int] = None
    owner: Optional[int] = None

    def render(self) -> str:
        if self.kind is GateKind.INPUT:
            return f"in {self.out} P{self.owner}"
        if self.kind is GateKind.OUTPUT:
            return f"out {self.out}"
        if self.kind in (GateKind.CONST_ADD, GateKind.SCALAR_MUL):
            return f"{self.kind.value} {self.out} {self.constant} {self.args[0]}"
        return f"{self.kind.value} {self.out} {self.args[0]} {self.args[1]}"


def input_gate(wire: str, owner: int) -> Gate:
    return Gate(GateKind.INPUT, wire, owner=owner)


def const_add(out: str, constant: int, wire: str) -> Gate:
    return Gate(GateKind.CONST_ADD, out, (wire,), constant=constant)


def scalar_mul(out: str, constant: int, wire: str) -> Gate:
    return Gate(GateKind.SCALAR_MUL, out, (wire,), constant=constant)


def add(out: str, left: str, right: str) -> Gate:
    return Gate(GateKind.ADD, out, (left, right))


def mul(out: str, left: str, right: str) -> Gate:
    return Gate(GateKind.MUL, out, (left, right))


def output(wire: str) -> Gate:
    return Gate(GateKind.OUTPUT, wire)


@dataclass(frozen=True)
class Circuit:
    """Gates in topological order; every wire is assigned exactly once"""

    modulus: int
    gates: Tuple[Gate, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        self.field  # validates the modulus
        assigned = set()
        for position, gate in enumerate(self.gates):
            where = f"gate {position} ({gate.render()})"
            if gate.kind is GateKind.OUTPUT:
                if gate.out not in assigned:
                    raise InvalidCircuit(f"{where}: output of unassigned wire {gate.out!r}")
                continue
            for arg in gate.args:
                if arg not in assigned:
                    raise InvalidCircuit(f"{where}: wire {arg!r} used before it is assigned")
            if gate.out in assigned:
                raise InvalidCircuit(f"{where}: wire {gate.out!r} assigned twice")
            if gate.kind is GateKind.INPUT and (gate.owner is None or gate.owner < 0):
                raise InvalidCircuit(f"{where}: input needs an owner")
            assigned.add(gate.out)
        if not self.outputs():
            raise InvalidCircuit("circuit has no output")

    @property
    def field(self) -> FieldSpec:
        return FieldSpec(self.modulus)

    def inputs(self) -> List[Tuple[str, int]]:
        return [(g.out, g.owner) for g in self.gates if g.kind is GateKind.INPUT]

    def outputs(self) -> List[str]:
        return [g.out for g in self.gates if g.kind is GateKind.OUTPUT]

    def mul_count(self) -> int:
        return sum(1 for g in self.gates if g.kind is GateKind.MUL)

    def max_player(self) -> int:
        return max((owner for _, owner in self.inputs()), default=-1)


def evaluate_plain(circuit: Circuit, inputs: Mapping[str, int]) -> Dict[str, FieldElement]:
    """Reference evaluation; returns the value of every output wire"""
    K = circuit.field
    wires: Dict[str, FieldElement] = {}
    for gate in circuit.gates:
        if gate.kind is GateKind.INPUT:
            if gate.out not in inputs:
                raise UnassignedInput(f"no value for input wire {gate.out!r} of P{gate.owner}")
            wires[gate.out] = K(int(inputs[gate.out]))
        elif gate.kind is GateKind.CONST_ADD:
            wires[gate.out] = wires[gate.args[0]] + gate.constant
        elif gate.kind is GateKind.SCALAR_MUL:
            wires[gate.out] = wires[gate.args[0]] * gate.constant
        elif gate.kind is GateKind.ADD:
            wires[gate.out] = wires[gate.args[0]] + wires[gate.args[1]]
        elif gate.kind is GateKind.MUL:
            wires[gate.out] = wires[gate.args[0]] * wires[gate.args[1]]
    return {wire: wires[wire] for wire in circuit.outputs()}
