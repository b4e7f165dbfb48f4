"""
Command implementations behind the CLI: premise checks, protocol runs over
many trials, and generators for threshold MSPs and structures.

Every command returns (report text, exit code); reports never contain
timings, so equal inputs give byte-identical reports.
"""
import logging
import math
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy import stats

from config.run_config import RunConfig
from src.circuit import Circuit, evaluate_plain
from src.errors import ParseError, PlayerCountMismatch, ProtocolAbort, Q2MpcError, StructureViolation
from src.engine_runner import run_mpc
from src.field import check_modulus_bound
from src.formats import (
    load_circuit,
    load_structure,
    parse_msp_source,
    serialize_msp,
    serialize_structure,
    write_text,
)
from src.msp import recombination_vector, threshold_msp
from src.structures import AdversaryStructure, is_qk, rejected_by
from src.wss import authentication_field

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_STRUCTURE = 3
EXIT_PROTOCOL = 4

_PLAYER_KEY = re.compile(r"^P(\d+)$")


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def cmd_check(msp_source: str, structure_path: Optional[str] = None,
              verbose: bool = False, settings: Optional[dict] = None) -> Tuple[str, int]:
    msp = parse_msp_source(msp_source)
    if structure_path:
        structure = load_structure(structure_path)
        origin = structure_path
    else:
        structure = AdversaryStructure.induced_by(msp)
        origin = "induced by the MSP"
    q2, q3 = is_qk(structure, 2), is_qk(structure, 3)
    try:
        rejects = rejected_by(structure, msp)
    except PlayerCountMismatch as e:
        raise StructureViolation(str(e)) from e
    r = recombination_vector(msp)

    lines = [
        f"msp: GF({msp.field.modulus}) d={msp.d} e={msp.e} n={msp.player_count}",
        f"structure: {origin}, {len(structure.maximal_sets)} maximal set(s)",
        f"is_q2: {_yes(q2)}",
        f"is_q3: {_yes(q3)}",
        f"rejected_by: {_yes(rejects)}",
        f"has_multiplication: {_yes(r is not None)}",
    ]
    if r is not None:
        lines.append("recombination: (" + ",".join(str(int(v)) for v in r) + ")")
    if verbose:
        lines.append("maximal sets:")
        lines += ["  {" + ",".join(map(str, sorted(s))) + "}" for s in structure.maximal_sets]
        for key, value in (settings or {}).items():
            lines.append(f"setting {key}: {value}")
    ok = q2 and rejects and r is not None
    lines.append("premises: " + ("ok" if ok else "FAILED"))
    return "\n".join(lines) + "\n", EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_gen_msp(n: int, t: int, q: int, output: Optional[str] = None) -> Tuple[str, int]:
    text = serialize_msp(threshold_msp(n, t, q))
    if output:
        write_text(output, text)
        return f"wrote {output}\n", EXIT_OK
    return text, EXIT_OK


def cmd_gen_structure(n: int, t: int, output: Optional[str] = None) -> Tuple[str, int]:
    text = serialize_structure(AdversaryStructure.threshold(n, t))
    if output:
        write_text(output, text)
        return f"wrote {output}\n", EXIT_OK
    return text, EXIT_OK


def resolve_inputs(circuit: Circuit, given: Mapping[str, int]) -> Dict[str, int]:
    """Keys are wire names or `P<i>` (every input wire of P<i>); missing wires read 0"""
    owners = dict(circuit.inputs())
    values = {wire: 0 for wire in owners}
    for key, value in given.items():
        match = _PLAYER_KEY.match(key)
        if key in owners:
            values[key] = value
        elif match and int(match.group(1)) in owners.values():
            for wire, owner in owners.items():
                if owner == int(match.group(1)):
                    values[wire] = value
        else:
            raise ParseError(f"--inputs names {key!r}, which is neither an input wire nor an input owner")
    return values


def trial_seeds(seed: int, trials: int) -> List[int]:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


@dataclass
class TrialResult:
    index: int
    seed: int
    outputs: Dict[str, int]
    expected: Dict[str, int]
    disqualified: Tuple[int, ...]
    restarts: int
    rounds: int
    messages: int
    bounded_checks: int
    digest: str
    error: Optional[str] = None

    @property
    def matches(self) -> bool:
        return self.error is None and self.outputs == self.expected


def _run_trial(job: Tuple[RunConfig, int, int]) -> TrialResult:
    config, index, seed = job
    circuit = load_circuit(config.circuit)
    msp = parse_msp_source(config.msp)
    structure = load_structure(config.structure) if config.structure else None
    inputs = resolve_inputs(circuit, config.inputs)
    try:
        outcome = run_mpc(circuit, inputs, msp, config.adversary.script(), config.k, seed,
                          structure=structure, overpowered=config.overpowered)
    except ProtocolAbort as e:
        return TrialResult(index, seed, {}, {}, (), 0, 0, 0, 0, "", error=str(e))
    expected_inputs = {**inputs, **{w: 0 for w in outcome.defaulted}}
    expected = {w: int(v) for w, v in evaluate_plain(circuit, expected_inputs).items()}
    return TrialResult(
        index, seed, outcome.outputs, expected,
        tuple(sorted(outcome.disqualified)), outcome.restarts,
        sum(s["rounds"] for s in outcome.stats.values()),
        sum(s["messages"] for s in outcome.stats.values()),
        outcome.bounded_checks, outcome.digest,
    )


def run_trials(config: RunConfig) -> List[TrialResult]:
    jobs = [(config, i, s) for i, s in enumerate(trial_seeds(config.seed, config.trials))]
    workers = min(config.workers, config.trials)
    if workers == 1:
        return [_run_trial(job) for job in jobs]
    logger.info(f"running {config.trials} trials on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        # map keeps trial order
        return list(executor.map(_run_trial, jobs))


def binomial_band(trials: int, p: float, sigmas: float = 3.0) -> Tuple[float, float, float]:
    """(mean, low, high) of the sigma band of Binomial(trials, p)"""
    distribution = stats.binom(trials, p)
    mean, spread = float(distribution.mean()), sigmas * float(distribution.std())
    return mean, max(0.0, mean - spread), mean + spread


def _format_outputs(outputs: Mapping[str, int]) -> str:
    return " ".join(f"{w}={v}" for w, v in sorted(outputs.items())) or "-"


def format_report(config: RunConfig, results: List[TrialResult]) -> str:
    lines = [
        f"run circuit={config.circuit} msp={config.msp} "
        f"adversary={config.adversary.script().describe()} k={config.k} seed={config.seed} trials={config.trials}"
    ]
    for r in results:
        if r.error is not None:
            lines.append(f"trial {r.index} seed={r.seed} aborted: {r.error}")
            continue
        lines.append(
            f"trial {r.index} seed={r.seed} outputs {_format_outputs(r.outputs)} "
            f"expected {_format_outputs(r.expected)} "
            f"disqualified={','.join(map(str, r.disqualified)) or '-'} restarts={r.restarts} "
            f"rounds={r.rounds} messages={r.messages} digest={r.digest[:16]}"
        )

    completed = [r for r in results if r.error is None]
    lines.append("summary")
    lines.append(f"  completed: {len(completed)}/{len(results)}")
    lines.append("  output histogram:")
    histogram = Counter(_format_outputs(r.outputs) for r in completed)
    lines += [f"    {key}: {count}" for key, count in sorted(histogram.items())]
    disqualified = Counter(p for r in completed for p in r.disqualified)
    lines.append("  disqualified: " + (", ".join(f"P{p} x{c}" for p, c in sorted(disqualified.items())) or "none"))
    restarts = Counter(r.restarts for r in completed)
    lines.append("  restarts: " + ", ".join(f"{k} x{c}" for k, c in sorted(restarts.items())))
    if completed:
        lines.append(f"  mean rounds: {sum(r.rounds for r in completed) / len(completed):.2f}")
        lines.append(f"  mean messages: {sum(r.messages for r in completed) / len(completed):.2f}")
        lines.append(f"  mean bounded checks: {sum(r.bounded_checks for r in completed) / len(completed):.2f}")
    cheats = sum(1 for r in completed if not r.matches)
    mean, low, high = binomial_band(len(results), 2.0 ** -config.k)
    lines.append(f"  undetected cheats: {cheats}")
    lines.append(
        f"  bound 2^-{config.k} x {len(results)} trials = {mean:.4f}, 3-sigma band [{low:.4f}, {high:.4f}]"
    )
    within = cheats <= math.floor(high)
    lines.append(f"  within band: {_yes(within)}")
    return "\n".join(lines) + "\n"


def cmd_run(config: RunConfig) -> Tuple[str, int]:
    # inputs and F are checked once, before any trial
    load_circuit(config.circuit)
    check_modulus_bound(authentication_field(parse_msp_source(config.msp), config.k))
    results = run_trials(config)
    report = format_report(config, results)
    if config.report:
        write_text(config.report, report)
    aborted = any(r.error is not None for r in results)
    preserves = config.adversary.script().strategy.preserves_inputs
    disagreed = preserves and any(not r.matches for r in results if r.error is None)
    return report, EXIT_PROTOCOL if aborted or disagreed else EXIT_OK


def exit_code_for(error: Exception) -> int:
    if isinstance(error, StructureViolation):
        return EXIT_STRUCTURE
    if isinstance(error, ProtocolAbort):
        return EXIT_PROTOCOL
    if isinstance(error, Q2MpcError):
        return EXIT_PARSE
    return EXIT_PROTOCOL
