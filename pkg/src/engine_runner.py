"""
LangGraph workflow runner for end-to-end MPC
Owns orchestration, state, routing: validate -> commit inputs -> evaluate
-> (restart -> commit inputs) | open outputs
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Mapping, Optional, TypedDict

from langgraph.graph import END, StateGraph

from src.circuit import Circuit, GateKind
from src.errors import (
    DealerCorrupt,
    InvalidCircuit,
    InvalidMsp,
    PlayerCountMismatch,
    PlayerOutOfRange,
    ProtocolAbort,
    Q2MpcError,
    RestartRequired,
    StructureViolation,
)
from src.field import check_modulus_bound
from src.msp import Msp, has_multiplication
from src.mult import mult
from src.simnet.adversary import AdversaryScript
from src.simnet.network import Network
from src.structures import AdversaryStructure, contains, is_qk, rejected_by
from src.vss import VssCommitment, vss_add_constant, vss_deal, vss_linear, vss_open, vss_open_batch, vss_public
from src.wss import authentication_field

logger = logging.getLogger(__name__)


class EngineState(TypedDict):
    circuit: Circuit
    msp: Msp
    structure: Optional[AdversaryStructure]
    adversary: AdversaryScript
    inputs: Dict[str, int]
    k: int
    seed: int
    overpowered: bool

    net: Optional[Network]
    wires: Dict[str, VssCommitment]
    public_inputs: Dict[str, int]
    disqualified: FrozenSet[int]
    defaulted: FrozenSet[str]
    restart_for: FrozenSet[int]
    restarts: int
    outputs: Dict[str, int]

    error: Optional[str]
    exception: Optional[Exception]
    success: bool


@dataclass
class RunOutcome:
    outputs: Dict[str, int]
    disqualified: FrozenSet[int]
    restarts: int
    defaulted: FrozenSet[str]
    stats: Dict[str, Dict[str, int]]
    bounded_checks: int
    digest: str
    transcript: Any = field(default=None, repr=False, compare=False)


def _structure_check(check, structure: AdversaryStructure, *args) -> bool:
    """Player-count and player-range mismatches are structure violations too"""
    try:
        return check(structure, *args)
    except (PlayerCountMismatch, PlayerOutOfRange) as e:
        raise StructureViolation(str(e)) from e


def _fail(state: EngineState, e: Exception) -> EngineState:
    logger.info(f"run failed: {e}")
    return {**state, "error": str(e), "exception": e}


class MpcWorkflow:
    def __init__(self):
        self.workflow = self._build_workflow()

    def _build_workflow(self) -> StateGraph:
        graph = StateGraph(EngineState)

        graph.add_node("validate", self._validate)
        graph.add_node("commit_inputs", self._commit_inputs)
        graph.add_node("evaluate", self._evaluate)
        graph.add_node("restart", self._restart)
        graph.add_node("open_outputs", self._open_outputs)
        graph.add_node("error", self._error)

        graph.set_entry_point("validate")

        graph.add_conditional_edges(
            "validate",
            self._route_ok("commit_inputs"),
            {"commit_inputs": "commit_inputs", "error": "error"}
        )
        graph.add_conditional_edges(
            "commit_inputs",
            self._route_ok("evaluate"),
            {"evaluate": "evaluate", "error": "error"}
        )
        graph.add_conditional_edges(
            "evaluate",
            self._route_evaluation,
            {"restart": "restart", "open_outputs": "open_outputs", "error": "error"}
        )
        graph.add_conditional_edges(
            "restart",
            self._route_ok("commit_inputs"),
            {"commit_inputs": "commit_inputs", "error": "error"}
        )
        graph.add_conditional_edges(
            "open_outputs",
            self._route_ok(END),
            {END: END, "error": "error"}
        )
        graph.add_edge("error", END)

        return graph.compile()

    @staticmethod
    def _route_ok(target: str):
        def route(state: EngineState) -> str:
            return "error" if state.get("error") else target
        return route

    def _route_evaluation(self, state: EngineState) -> str:
        if state.get("error"):
            return "error"
        if state.get("restart_for"):
            return "restart"
        return "open_outputs"

    def _validate(self, state: EngineState) -> EngineState:
        circuit, msp, adversary = state["circuit"], state["msp"], state["adversary"]
        try:
            if circuit.modulus != msp.field.modulus:
                raise InvalidCircuit(
                    f"circuit is over GF({circuit.modulus}) but the MSP over GF({msp.field.modulus})"
                )
            if circuit.max_player() >= msp.player_count:
                raise PlayerCountMismatch(
                    f"circuit names P{circuit.max_player()} but the MSP has {msp.player_count} players"
                )
            if not has_multiplication(msp):
                raise InvalidMsp("the MSP has no multiplication property")
            check_modulus_bound(authentication_field(msp, state["k"]))
            structure = state.get("structure") or AdversaryStructure.induced_by(msp)
            if not is_qk(structure, 2):
                raise StructureViolation("adversary structure is not Q2")
            if not _structure_check(rejected_by, structure, msp):
                raise StructureViolation("the MSP accepts a set of the adversary structure")
            if not _structure_check(contains, structure, adversary.corrupt):
                if not state.get("overpowered"):
                    raise StructureViolation(
                        f"corrupt set {sorted(adversary.corrupt)} is not in the adversary structure"
                    )
                logger.warning(f"overpowered run: corrupt set {sorted(adversary.corrupt)} outside the structure")
            net = Network(msp.player_count, adversary, state["seed"])
        except (Q2MpcError, ValueError) as e:
            return _fail(state, e)
        net.annotate("engine.start", adversary.describe(), state["k"])
        return {**state, "structure": structure, "net": net}

    def _commit_inputs(self, state: EngineState) -> EngineState:
        net, msp, k = state["net"], state["msp"], state["k"]
        wires: Dict[str, VssCommitment] = {}
        disqualified = set(state["disqualified"])
        defaulted = set(state["defaulted"])
        for wire, owner in state["circuit"].inputs():
            if wire in state["public_inputs"]:
                wires[wire] = vss_public(net, msp, state["public_inputs"][wire], k, owner=owner)
                continue
            value = state["inputs"].get(wire, 0)
            net.transcript.record_input(owner, wire, value)
            try:
                wires[wire] = vss_deal(net, owner, msp.field(value), msp, k)
            except DealerCorrupt as e:
                logger.info(f"input {wire} of P{owner} replaced by 0: {e.reason}")
                disqualified.add(owner)
                defaulted.add(wire)
                net.silence(owner)
                wires[wire] = vss_public(net, msp, 0, k, owner=owner)
        return {
            **state,
            "wires": wires,
            "disqualified": frozenset(disqualified),
            "defaulted": frozenset(defaulted),
            "restart_for": frozenset(),
        }

    def _evaluate(self, state: EngineState) -> EngineState:
        net, k = state["net"], state["k"]
        wires = dict(state["wires"])
        try:
            for gate in state["circuit"].gates:
                if gate.kind is GateKind.CONST_ADD:
                    wires[gate.out] = vss_add_constant(net, wires[gate.args[0]], gate.constant)
                elif gate.kind is GateKind.SCALAR_MUL:
                    wires[gate.out] = vss_linear(net, [(gate.constant, wires[gate.args[0]])])
                elif gate.kind is GateKind.ADD:
                    wires[gate.out] = vss_linear(net, [(1, wires[gate.args[0]]), (1, wires[gate.args[1]])])
                elif gate.kind is GateKind.MUL:
                    wires[gate.out] = mult(net, wires[gate.args[0]], wires[gate.args[1]], k)
        except RestartRequired as e:
            logger.info(f"restart requested, cheaters {sorted(e.cheaters)}")
            return {**state, "wires": wires, "restart_for": e.cheaters}
        except Q2MpcError as e:
            return _fail(state, e)
        return {**state, "wires": wires}

    def _restart(self, state: EngineState) -> EngineState:
        """Open the cheaters' inputs, fix them as public constants and start over"""
        net = state["net"]
        restarts = state["restarts"] + 1
        if restarts > net.n:
            return _fail(state, ProtocolAbort(f"more than {net.n} restarts"))
        cheaters = state["restart_for"]
        public_inputs = dict(state["public_inputs"])
        # players silenced earlier in the run cannot deal again either
        opened = cheaters | net.silenced
        try:
            for wire, owner in state["circuit"].inputs():
                if owner in opened and wire not in public_inputs:
                    public_inputs[wire] = int(vss_open(net, state["wires"][wire]))
        except Q2MpcError as e:
            return _fail(state, e)
        for cheater in sorted(cheaters):
            net.silence(cheater)
        net.annotate("engine.restart", restarts, tuple(sorted(cheaters)))
        return {
            **state,
            "public_inputs": public_inputs,
            "disqualified": state["disqualified"] | opened,
            "restart_for": frozenset(),
            "restarts": restarts,
        }

    def _open_outputs(self, state: EngineState) -> EngineState:
        net = state["net"]
        names = state["circuit"].outputs()
        try:
            values = vss_open_batch(net, [state["wires"][w] for w in names])
        except Q2MpcError as e:
            return _fail(state, e)
        outputs = {w: int(v) for w, v in zip(names, values)}
        net.annotate("engine.outputs", tuple(sorted(outputs.items())))
        return {**state, "outputs": outputs, "success": True}

    def _error(self, state: EngineState) -> EngineState:
        return {**state, "success": False}


# singleton workflow
_workflow = MpcWorkflow()


def run_mpc(circuit: Circuit, inputs: Mapping[str, int], msp: Msp,
            adversary: Optional[AdversaryScript] = None, k: int = 8, seed: int = 0,
            structure: Optional[AdversaryStructure] = None, overpowered: bool = False) -> RunOutcome:
    """Evaluate `circuit` on the players' inputs; raises the error that stopped the run"""
    adversary = adversary or AdversaryScript.honest()
    state: EngineState = {
        "circuit": circuit,
        "msp": msp,
        "structure": structure,
        "adversary": adversary,
        "inputs": {w: int(v) for w, v in inputs.items()},
        "k": k,
        "seed": seed,
        "overpowered": overpowered,
        "net": None,
        "wires": {},
        "public_inputs": {},
        "disqualified": frozenset(),
        "defaulted": frozenset(),
        "restart_for": frozenset(),
        "restarts": 0,
        "outputs": {},
        "error": None,
        "exception": None,
        "success": False,
    }
    # every restart revisits three nodes
    limit = 16 + 4 * (msp.player_count + 1)
    final = _workflow.workflow.invoke(state, {"recursion_limit": limit})
    if not final["success"]:
        raise final["exception"] or ProtocolAbort(final.get("error") or "run failed")
    net = final["net"]
    return RunOutcome(
        outputs=final["outputs"],
        disqualified=final["disqualified"] | net.silenced,
        restarts=final["restarts"],
        defaulted=final["defaulted"],
        stats=net.transcript.stats(),
        bounded_checks=net.transcript.bounded_checks,
        digest=net.transcript.digest(),
        transcript=net.transcript,
    )
