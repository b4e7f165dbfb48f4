"""
Deterministic round-synchronous network with reliable broadcast and
pairwise secure channels
"""
import copy
import hashlib
import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Protocol, Sequence, Tuple

from src.errors import PlayerOutOfRange, ProtocolAbort
from src.simnet.adversary import AdversaryScript
from src.simnet.randomness import RandomStream

logger = logging.getLogger(__name__)

# (receiver or None for broadcast, kind, payload)
Outgoing = Tuple[Optional[int], str, Any]


@dataclass(frozen=True)
class Message:
    round: int
    sender: int
    receiver: Optional[int]
    kind: str
    payload: Any

    @property
    def is_broadcast(self) -> bool:
        return self.receiver is None

    def render(self) -> str:
        to = "*" if self.receiver is None else str(self.receiver)
        return f"{self.round}|{self.sender}->{to}|{self.kind}|{self.payload!r}"


@dataclass
class Party:
    index: int
    stream: RandomStream
    strategy: Any = None
    corrupt: bool = False
    silenced: bool = False
    store: Dict[Any, Any] = field(default_factory=dict)
    rushed: List[Message] = field(default_factory=list)

    def deviate(self, hook: str, value, **context):
        if not self.corrupt or self.strategy is None:
            return value
        return self.strategy.deviate(self, hook, value, context)

    def refuses(self, hook: str, **context) -> bool:
        if not self.corrupt or self.strategy is None:
            return False
        return self.strategy.refuses(self, hook, context)


@dataclass(frozen=True)
class View:
    players: FrozenSet[int]
    messages: Tuple[Message, ...]
    seeds: Tuple[Tuple[int, str], ...]
    inputs: Tuple[Tuple[int, str, Any], ...]


class Transcript:
    def __init__(self, player_count: int, seed: int, seeds: Sequence[str]):
        self.player_count = player_count
        self.seed = seed
        self.seeds = tuple(seeds)
        self.messages: List[Message] = []
        self.annotations: List[Tuple[int, str, Tuple]] = []
        self.inputs: List[Tuple[int, str, Any]] = []
        self.rounds = 0
        self.round_counts: Counter = Counter()
        self.message_counts: Counter = Counter()
        self.bounded_checks = 0

    def annotate(self, round_no: int, kind: str, *details):
        self.annotations.append((round_no, kind, tuple(details)))

    def annotations_of(self, kind: str) -> List[Tuple]:
        return [details for _, k, details in self.annotations if k == kind]

    def record_input(self, player: int, label: str, value):
        self.inputs.append((player, label, value))

    def receptions(self) -> List[Message]:
        """Every delivery, broadcasts expanded to one reception per player"""
        out = []
        for m in self.messages:
            if m.is_broadcast:
                out.extend(Message(m.round, m.sender, i, m.kind, m.payload) for i in range(self.player_count))
            else:
                out.append(m)
        return out

    def render(self) -> str:
        lines = [f"seed {self.seed}"]
        lines += [f"stream {i} {s}" for i, s in enumerate(self.seeds)]
        lines += [m.render() for m in self.messages]
        lines += [f"note {r}|{kind}|{details!r}" for r, kind, details in self.annotations]
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.render().encode("utf-8")).hexdigest()

    def stats(self) -> Dict[str, Dict[str, int]]:
        families = sorted(set(self.round_counts) | set(self.message_counts))
        return {f: {"rounds": self.round_counts[f], "messages": self.message_counts[f]} for f in families}


class Delivery:
    """Messages of one round, indexed by (kind, sender, receiver, instance id)"""

    def __init__(self, messages: List[Message]):
        self.messages = messages
        self._index: Dict[Tuple, Tuple] = {}
        for m in messages:
            if not isinstance(m.payload, tuple) or not m.payload:
                continue
            key = (m.kind, m.sender, m.receiver, m.payload[0])
            self._index.setdefault(key, m.payload[1:])

    def get(self, kind: str, sender: int, iid, receiver: Optional[int] = None) -> Optional[Tuple]:
        return self._index.get((kind, sender, receiver, iid))

    def inbox(self, player: int) -> List[Message]:
        return [m for m in self.messages if m.receiver is None or m.receiver == player]


class Network:
    """
    Lockstep scheduler. Protocol code drives rounds through `exchange`, and each
    party's contribution is computed from its own store and what it received.
    """

    def __init__(self, n: int, adversary: Optional[AdversaryScript] = None, seed: int = 0):
        if n < 2:
            raise ValueError("need at least two players")
        self.n = n
        self.adversary = adversary or AdversaryScript.honest()
        for p in self.adversary.corrupt:
            if not 0 <= p < n:
                raise PlayerOutOfRange(f"corrupt player {p} outside 0..{n - 1}")
        streams = RandomStream.split(seed, n + 1)
        self.adversary_stream = streams[n]
        self.adversary.strategy.bind(self.adversary_stream)
        self.parties = [
            Party(i, streams[i], self.adversary.strategy, i in self.adversary.corrupt)
            for i in range(n)
        ]
        self.transcript = Transcript(n, seed, [s.describe() for s in streams])
        self._ids = itertools.count()

    @property
    def corrupt(self) -> FrozenSet[int]:
        return self.adversary.corrupt

    @property
    def silenced(self) -> FrozenSet[int]:
        return frozenset(p.index for p in self.parties if p.silenced)

    @property
    def round(self) -> int:
        return self.transcript.rounds

    def honest(self) -> List[int]:
        return [i for i in range(self.n) if i not in self.corrupt]

    def party(self, index: int) -> Party:
        return self.parties[index]

    def next_id(self, prefix: str) -> str:
        return f"{prefix}{next(self._ids)}"

    def silence(self, player: int):
        if not self.parties[player].silenced:
            logger.info(f"P{player} silenced")
            self.parties[player].silenced = True
            self.annotate("silenced", player)

    def set_stream(self, player: int, stream: RandomStream):
        self.parties[player].stream = stream

    def set_strategy(self, player: int, strategy):
        """Corrupt `player` with its own strategy (used for forked continuations)"""
        strategy.bind(self.adversary_stream)
        self.parties[player].strategy = strategy
        self.parties[player].corrupt = True

    def annotate(self, kind: str, *details):
        self.transcript.annotate(self.round, kind, *details)

    def count_bounded_check(self, count: int = 1):
        self.transcript.bounded_checks += count

    def fork(self) -> "Network":
        return copy.deepcopy(self)

    def exchange(self, label: str, outbox: Callable[[Party], Iterable[Outgoing]]) -> Delivery:
        """Run one synchronous round: every active party sends what `outbox` yields for it"""
        round_no = self.transcript.rounds
        self.transcript.rounds += 1
        family = label.split(".", 1)[0]
        self.transcript.round_counts[family] += 1

        sent: List[Message] = []
        active = [p for p in self.parties if not p.silenced]
        for party in active:
            if party.corrupt:
                continue
            sent.extend(self._collect(party, round_no, outbox))
        for party in active:
            if not party.corrupt:
                continue
            if self.adversary.rushing:
                party.rushed = [m for m in sent if m.receiver is None or m.receiver == party.index]
            else:
                party.rushed = []
            sent.extend(self._collect(party, round_no, outbox))
            party.rushed = []

        sent.sort(key=lambda m: m.sender)
        self.transcript.messages.extend(sent)
        self.transcript.message_counts[family] += len(sent)
        logger.debug(f"round {round_no} {label}: {len(sent)} message(s)")
        return Delivery(sent)

    def _collect(self, party: Party, round_no: int, outbox) -> List[Message]:
        out = []
        for receiver, kind, payload in outbox(party) or ():
            if receiver is not None and not 0 <= receiver < self.n:
                continue
            out.append(Message(round_no, party.index, receiver, kind, payload))
        return out


def coin_flip(net: Network, flipper: int, purpose: Tuple) -> int:
    """`flipper` flips a coin and broadcasts the bit; a missing or malformed bit reads as 0"""
    iid = net.next_id("coin")

    def outbox(party: Party):
        if party.index != flipper:
            return ()
        bit = party.deviate("coin", party.stream.coin(), purpose=purpose)
        return [(None, "coin", (iid, bit))]

    delivery = net.exchange("coin.flip", outbox)
    got = delivery.get("coin", flipper, iid)
    bit = int(got[0]) if got and isinstance(got[0], int) and got[0] in (0, 1) else 0
    net.annotate("coin", purpose, flipper, bit)
    return bit


def view_of(transcript: Transcript, players: Iterable[int]) -> View:
    chosen = frozenset(players)
    for p in chosen:
        if not 0 <= p < transcript.player_count:
            raise PlayerOutOfRange(f"player {p} outside 0..{transcript.player_count - 1}")
    received = tuple(m for m in transcript.receptions() if m.receiver in chosen)
    seeds = tuple((p, transcript.seeds[p]) for p in sorted(chosen))
    inputs = tuple(entry for entry in transcript.inputs if entry[0] in chosen)
    return View(chosen, received, seeds, inputs)


class PartyMachine(Protocol):
    done: bool

    def step(self, party: Party, round_no: int, inbox: List[Message]) -> Iterable[Outgoing]:
        ...


def run_protocol(machines: Sequence[PartyMachine], adversary: Optional[AdversaryScript] = None,
                 seed: int = 0, max_rounds: int = 1000) -> Transcript:
    """Drive one state machine per party until all are done"""
    net = Network(len(machines), adversary, seed)
    inboxes: Dict[int, List[Message]] = defaultdict(list)
    for _ in range(max_rounds):
        if all(m.done for m in machines):
            return net.transcript
        round_no = net.round

        def outbox(party: Party):
            machine = machines[party.index]
            if machine.done:
                return ()
            inbox = inboxes[party.index] + list(party.rushed)
            return machine.step(party, round_no, inbox)

        delivery = net.exchange("run.step", outbox)
        inboxes = defaultdict(list)
        for i in range(net.n):
            inboxes[i] = delivery.inbox(i)
    raise ProtocolAbort(f"protocol did not finish within {max_rounds} rounds", net.transcript)
