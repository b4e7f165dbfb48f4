"""
Guaranteed information checking.

A dealer D hands a value s in F to an intermediary INT together with keys y,
and hands the receiver R check vectors (b, c) with c = s + b*y. INT can later
convince R of s; a forged value passes only if INT guesses b.

Generation runs batched: every round of every requested instance happens in
the same network round.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from src.errors import ZeroScalar
from src.field import FieldElement, FieldSpec, as_element
from src.simnet.network import Network, Party

logger = logging.getLogger(__name__)


class GicPath(str, Enum):
    LIST = "list"
    DISPUTE = "dispute"
    PUBLIC = "public"


class GicOutcome(str, Enum):
    ESTABLISHED = "established"
    S_PUBLISHED = "s_published"
    DEALER_DISQUALIFIED = "dealer_disqualified"


@dataclass(frozen=True)
class CheckVector:
    b: FieldElement
    c: FieldElement

    def __post_init__(self):
        if self.b == 0:
            raise ValueError("check vector needs b != 0")


@dataclass(frozen=True)
class GicIntState:
    s: Optional[FieldElement]
    keys: Tuple[Tuple[int, FieldElement], ...]
    path: GicPath


@dataclass(frozen=True)
class GicRecvState:
    vectors: Tuple[Tuple[int, CheckVector], ...]
    path: GicPath
    published: Optional[FieldElement] = None


@dataclass(frozen=True)
class GicRequest:
    gid: str
    dealer: int
    intermediary: int
    receiver: int
    field: FieldSpec
    k: int
    # what D believes INT holds, and what INT actually holds
    dealer_secret: Optional[FieldElement]
    int_secret: Optional[FieldElement]


@dataclass(frozen=True)
class GicResult:
    gid: str
    outcome: GicOutcome
    published: Optional[FieldElement] = None


def int_key(gid: str) -> Tuple[str, str]:
    return ("gic.int", gid)


def recv_key(gid: str) -> Tuple[str, str]:
    return ("gic.recv", gid)


def _parse_pairs(raw, spec: FieldSpec, count: int) -> Optional[Tuple[CheckVector, ...]]:
    if not isinstance(raw, tuple) or len(raw) != count:
        return None
    pairs = []
    for item in raw:
        if not isinstance(item, tuple) or len(item) != 2:
            return None
        b, c = as_element(item[0], spec), as_element(item[1], spec)
        if b is None or c is None or b == 0:
            return None
        pairs.append(CheckVector(b, c))
    return tuple(pairs)


def _parse_subset(raw, population: int, size: int) -> Tuple[int, ...]:
    default = tuple(range(size))
    if not isinstance(raw, tuple) or len(raw) != size:
        return default
    if not all(isinstance(i, int) and 0 <= i < population for i in raw) or len(set(raw)) != size:
        return default
    return tuple(sorted(raw))


def _parse_revealed(raw, spec: FieldSpec, indices: Tuple[int, ...]) -> Optional[Dict[int, CheckVector]]:
    if not isinstance(raw, tuple) or len(raw) != len(indices):
        return None
    revealed = {}
    for item in raw:
        if not isinstance(item, tuple) or len(item) != 3:
            return None
        i, b, c = item[0], as_element(item[1], spec), as_element(item[2], spec)
        if i not in indices or b is None or c is None or b == 0:
            return None
        revealed[i] = CheckVector(b, c)
    return revealed if set(revealed) == set(indices) else None


def gic_generate_batch(net: Network, requests: Sequence[GicRequest]) -> Dict[str, GicResult]:
    """
    GIC-Generate for every request at once. States land in the stores of
    INT (`int_key`) and R (`recv_key`); the returned outcomes are public.
    """
    if not requests:
        return {}
    net.count_bounded_check(len(requests))
    by_dealer: Dict[int, List[GicRequest]] = {}
    by_int: Dict[int, List[GicRequest]] = {}
    by_recv: Dict[int, List[GicRequest]] = {}
    for req in requests:
        by_dealer.setdefault(req.dealer, []).append(req)
        by_int.setdefault(req.intermediary, []).append(req)
        by_recv.setdefault(req.receiver, []).append(req)

    # 1. D sends keys to INT and check vectors to R
    def deal(party: Party):
        out = []
        for req in by_dealer.get(party.index, ()):
            if req.dealer_secret is None:
                continue
            count = 2 * req.k
            ys = party.stream.vector(req.field, count)
            bs = tuple(party.stream.nonzero(req.field) for _ in range(count))
            pairs = tuple((b, req.dealer_secret + b * y) for b, y in zip(bs, ys))
            party.store[("gic.dealer", req.gid)] = (req.dealer_secret, ys, pairs)
            out.append((req.intermediary, "gic.keys", (req.gid, ys)))
            out.append((req.receiver, "gic.checks", (req.gid, pairs)))
        return out

    delivery = net.exchange("gic.deal", deal)
    keys: Dict[str, Optional[Tuple[FieldElement, ...]]] = {}
    checks: Dict[str, Optional[Tuple[CheckVector, ...]]] = {}
    for req in requests:
        count = 2 * req.k
        got = delivery.get("gic.keys", req.dealer, req.gid, req.intermediary)
        ys = None
        if got is not None and isinstance(got[0], tuple) and len(got[0]) == count:
            parsed = tuple(as_element(y, req.field) for y in got[0])
            ys = None if any(y is None for y in parsed) else parsed
        keys[req.gid] = ys
        got = delivery.get("gic.checks", req.dealer, req.gid, req.receiver)
        checks[req.gid] = _parse_pairs(got[0], req.field, count) if got is not None else None

    # 2. INT broadcasts a random k-subset I of the 2k indices
    def challenge(party: Party):
        return [
            (None, "gic.I", (req.gid, party.stream.subset(2 * req.k, req.k)))
            for req in by_int.get(party.index, ())
        ]

    delivery = net.exchange("gic.challenge", challenge)
    chosen: Dict[str, Tuple[int, ...]] = {}
    for req in requests:
        got = delivery.get("gic.I", req.intermediary, req.gid)
        chosen[req.gid] = _parse_subset(got[0] if got else None, 2 * req.k, req.k)

    # 3. R broadcasts the check vectors indexed by I
    def reveal(party: Party):
        out = []
        for req in by_recv.get(party.index, ()):
            pairs = checks[req.gid]
            if pairs is None:
                out.append((None, "gic.revealed", (req.gid, ())))
                continue
            shown = tuple((i, pairs[i].b, pairs[i].c) for i in chosen[req.gid])
            shown = party.deviate("gic.reveal", shown, gid=req.gid)
            out.append((None, "gic.revealed", (req.gid, shown)))
        return out

    delivery = net.exchange("gic.reveal", reveal)
    revealed: Dict[str, Optional[Dict[int, CheckVector]]] = {}
    for req in requests:
        got = delivery.get("gic.revealed", req.receiver, req.gid)
        revealed[req.gid] = _parse_revealed(got[0], req.field, chosen[req.gid]) if got else None

    # 4. D approves, or broadcasts a single fresh check vector
    def verdict(party: Party):
        out = []
        for req in by_dealer.get(party.index, ()):
            record = party.store.get(("gic.dealer", req.gid))
            if record is None:
                continue
            s, _, pairs = record
            expected = {i: CheckVector(*pairs[i]) for i in chosen[req.gid]}
            if revealed[req.gid] == expected:
                out.append((None, "gic.approve", (req.gid,)))
                continue
            y = party.stream.element(req.field)
            b = party.stream.nonzero(req.field)
            out.append((None, "gic.fresh", (req.gid, b, s + b * y)))
            out.append((req.intermediary, "gic.fresh_key", (req.gid, y)))
        return out

    delivery = net.exchange("gic.verdict", verdict)
    approved: Dict[str, bool] = {}
    fresh: Dict[str, Optional[CheckVector]] = {}
    fresh_keys: Dict[str, Optional[FieldElement]] = {}
    for req in requests:
        approved[req.gid] = delivery.get("gic.approve", req.dealer, req.gid) is not None
        got = delivery.get("gic.fresh", req.dealer, req.gid)
        vector = None
        if got is not None and len(got) == 2:
            b, c = as_element(got[0], req.field), as_element(got[1], req.field)
            if b is not None and c is not None and b != 0:
                vector = CheckVector(b, c)
        fresh[req.gid] = None if approved[req.gid] else vector
        got = delivery.get("gic.fresh_key", req.dealer, req.gid, req.intermediary)
        fresh_keys[req.gid] = as_element(got[0], req.field) if got else None

    # 5. INT predicts whether R will accept, and approves or demands s
    def decide(party: Party):
        out = []
        for req in by_int.get(party.index, ()):
            ok = _int_predicts_acceptance(
                req.int_secret, keys[req.gid], chosen[req.gid], revealed[req.gid],
                approved[req.gid], fresh[req.gid], fresh_keys[req.gid],
            )
            ok = party.deviate("gic.decision", ok, gid=req.gid)
            out.append((None, "gic.accept" if ok else "gic.demand", (req.gid,)))
        return out

    delivery = net.exchange("gic.decision", decide)
    demanded = [req for req in requests if delivery.get("gic.demand", req.intermediary, req.gid) is not None]

    # 6. On demand, D broadcasts s
    published: Dict[str, Optional[FieldElement]] = {}
    if demanded:
        by_demanded_dealer: Dict[int, List[GicRequest]] = {}
        for req in demanded:
            by_demanded_dealer.setdefault(req.dealer, []).append(req)

        def publish(party: Party):
            out = []
            for req in by_demanded_dealer.get(party.index, ()):
                if party.refuses("gic.publish", gid=req.gid):
                    continue
                record = party.store.get(("gic.dealer", req.gid))
                s = record[0] if record is not None else req.dealer_secret
                if s is not None:
                    out.append((None, "gic.s", (req.gid, s)))
            return out

        delivery = net.exchange("gic.publish", publish)
        for req in demanded:
            got = delivery.get("gic.s", req.dealer, req.gid)
            published[req.gid] = as_element(got[0], req.field) if got else None

    results: Dict[str, GicResult] = {}
    demanded_ids = {req.gid for req in demanded}
    for req in requests:
        intermediary = net.party(req.intermediary)
        receiver = net.party(req.receiver)
        if req.gid in demanded_ids:
            value = published[req.gid]
            if value is None:
                logger.info(f"GIC {req.gid}: P{req.dealer} did not publish s, disqualified")
                net.annotate("gic.disqualified", req.gid, req.dealer)
                results[req.gid] = GicResult(req.gid, GicOutcome.DEALER_DISQUALIFIED)
                continue
            logger.debug(f"GIC {req.gid}: s published by P{req.dealer}")
            intermediary.store[int_key(req.gid)] = GicIntState(value, (), GicPath.PUBLIC)
            receiver.store[recv_key(req.gid)] = GicRecvState((), GicPath.PUBLIC, value)
            results[req.gid] = GicResult(req.gid, GicOutcome.S_PUBLISHED, value)
            continue

        indices = chosen[req.gid]
        if approved[req.gid]:
            ys = keys[req.gid]
            kept = () if ys is None else tuple((i, ys[i]) for i in range(2 * req.k) if i not in indices)
            pairs = checks[req.gid]
            vectors = () if pairs is None else tuple((i, pairs[i]) for i in range(2 * req.k) if i not in indices)
            path = GicPath.LIST
        else:
            single = 2 * req.k
            y = fresh_keys[req.gid]
            kept = () if y is None else ((single, y),)
            vectors = () if fresh[req.gid] is None else ((single, fresh[req.gid]),)
            path = GicPath.DISPUTE
        intermediary.store[int_key(req.gid)] = GicIntState(req.int_secret, kept, path)
        receiver.store[recv_key(req.gid)] = GicRecvState(vectors, path)
        results[req.gid] = GicResult(req.gid, GicOutcome.ESTABLISHED)
    return results


def _int_predicts_acceptance(s, ys, indices, revealed, approved, fresh, fresh_key) -> bool:
    if s is None:
        return False
    if approved:
        if ys is None or revealed is None:
            return False
        return all(revealed[i].c == s + revealed[i].b * ys[i] for i in indices)
    if fresh is None or fresh_key is None:
        return False
    return fresh.c == s + fresh.b * fresh_key


def gic_generate(net: Network, dealer: int, intermediary: int, receiver: int, s: FieldElement,
                 field: FieldSpec, k: int) -> Tuple[Optional[GicIntState], Optional[GicRecvState], GicResult]:
    """Single GIC-Generate(D -> INT -> R, s); INT already holds s"""
    gid = net.next_id("gic")
    request = GicRequest(gid, dealer, intermediary, receiver, field, k, s, s)
    result = gic_generate_batch(net, [request])[gid]
    return (
        net.party(intermediary).store.get(int_key(gid)),
        net.party(receiver).store.get(recv_key(gid)),
        result,
    )


def gic_authenticate(int_state: GicIntState, recv_state: GicRecvState, claimed: FieldElement) -> bool:
    """R's decision on INT's submitted value and keys"""
    if recv_state.path is GicPath.PUBLIC:
        return recv_state.published is not None and claimed == recv_state.published
    vectors = dict(recv_state.vectors)
    for index, y in int_state.keys:
        vector = vectors.get(index)
        if vector is not None and vector.c == claimed + vector.b * y:
            return True
    return False


def scale_int_state(state: GicIntState, factor: FieldElement) -> GicIntState:
    s = state.s * factor if state.s is not None else None
    return GicIntState(s, state.keys, state.path)


def scale_recv_state(state: GicRecvState, factor: FieldElement) -> GicRecvState:
    vectors = tuple((i, CheckVector(v.b * factor, v.c * factor)) for i, v in state.vectors)
    published = state.published * factor if state.published is not None else None
    return GicRecvState(vectors, state.path, published)


def gic_scale(int_state: GicIntState, recv_state: GicRecvState,
              factor: FieldElement) -> Tuple[GicIntState, GicRecvState]:
    """s -> factor*s with keys unchanged and (b, c) -> (factor*b, factor*c)"""
    if factor == 0:
        raise ZeroScalar("cannot scale an information check by 0")
    return scale_int_state(int_state, factor), scale_recv_state(recv_state, factor)
