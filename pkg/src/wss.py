"""
Weak secret sharing: SHARE plus pairwise information checks, opening with the
dealer's help, local scaling, addition with fresh checks, and the
cut-and-choose proof that a commitment is well formed.
"""
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from src.errors import DealerDisqualified, DealerMismatch, FieldTooSmall, MspMismatch
from src.field import FieldElement, FieldSpec, as_element, as_vector, decode_shares, encode_shares
from src.ic import (
    GicIntState,
    GicOutcome,
    GicRecvState,
    GicRequest,
    gic_authenticate,
    gic_generate_batch,
    int_key,
    recv_key,
    scale_int_state,
    scale_recv_state,
)
from src.msp import (
    ExtendedSecret,
    Msp,
    ShareVector,
    check_row,
    qualified,
    reconstruct,
    share,
    smallest_qualified,
    solve_linear,
)
from src.simnet.network import Network, Party, coin_flip

logger = logging.getLogger(__name__)

Vector = Tuple[FieldElement, ...]


@lru_cache(maxsize=64)
def authentication_field(msp: Msp, k: int) -> FieldSpec:
    """F with |F| > max(|K|^d, 2^k)"""
    return FieldSpec.authentication_for(msp.field, msp.d, k)


@dataclass(frozen=True)
class WssCommitment:
    """Public handle of [a]^W_D; private parts live in each party's store"""

    wid: str
    dealer: int
    msp: Msp
    auth_field: FieldSpec
    k: int
    # current shares = k_factor * authenticated shares; GIC values carry f_factor
    k_factor: FieldElement
    f_factor: FieldElement
    public_shares: Tuple[Tuple[int, Vector], ...] = ()
    trivial: bool = False
    disqualified: bool = False

    def public_rows(self, player: int) -> Optional[Vector]:
        return dict(self.public_shares).get(player)


@dataclass
class WssLocal:
    shares: Optional[Vector]
    gic_int: Dict[int, GicIntState] = field(default_factory=dict)
    gic_recv: Dict[int, GicRecvState] = field(default_factory=dict)
    # dealer only
    a_star: Optional[ExtendedSecret] = None
    dealt: Optional[Vector] = None


@dataclass(frozen=True)
class WssOpening:
    wid: str
    value: Optional[FieldElement]
    accusers: FrozenSet[int] = frozenset()

    @property
    def null(self) -> bool:
        return self.value is None


def local(net: Network, c: WssCommitment, player: int) -> Optional[WssLocal]:
    return net.party(player).store.get(("wss", c.wid))


def dealer_secret(net: Network, c: WssCommitment) -> Optional[FieldElement]:
    """The value the dealer itself believes it committed to"""
    record = local(net, c, c.dealer)
    if c.trivial:
        return c.msp.field.zero
    if record is None or record.a_star is None:
        return None
    return record.a_star.secret


def _rows(msp: Msp, values: Sequence[FieldElement], player: int) -> Vector:
    return tuple(values[l] for l in msp.rows_of(player))


def _new_handle(net: Network, template: WssCommitment, **changes) -> WssCommitment:
    return replace(template, wid=net.next_id("wss"), **changes)


def _base_handle(net: Network, dealer: int, msp: Msp, k: int) -> WssCommitment:
    F = authentication_field(msp, k)
    return WssCommitment(net.next_id("wss"), dealer, msp, F, k, msp.field.one, F.one)


def _authenticate_all(net: Network, handles: List[WssCommitment], label: str) -> List[WssCommitment]:
    """Pairwise GIC of every player's current shares, for every handle at once"""
    requests = []
    for c in handles:
        dealer_record = local(net, c, c.dealer)
        for i in c.msp.players:
            mine = local(net, c, i)
            int_secret = None
            if mine is not None and mine.shares is not None:
                int_secret = encode_shares(mine.shares, c.auth_field)
            expected = None
            if dealer_record is not None and dealer_record.dealt is not None:
                expected = encode_shares(_rows(c.msp, dealer_record.dealt, i), c.auth_field)
            for j in c.msp.players:
                if i == j:
                    continue
                requests.append(GicRequest(f"{c.wid}:{i}>{j}", c.dealer, i, j, c.auth_field, c.k,
                                           expected, int_secret))
    results = gic_generate_batch(net, requests)

    updated = []
    for c in handles:
        disqualified = False
        # shares already public stay public
        published: Dict[int, Vector] = dict(c.public_shares)
        for i in c.msp.players:
            for j in c.msp.players:
                if i == j:
                    continue
                gid = f"{c.wid}:{i}>{j}"
                result = results[gid]
                intermediary, receiver = net.party(i), net.party(j)
                int_state = intermediary.store.pop(int_key(gid), None)
                recv_state = receiver.store.pop(recv_key(gid), None)
                if int_state is not None:
                    intermediary.store[("wss", c.wid)].gic_int[j] = int_state
                if recv_state is not None:
                    receiver.store[("wss", c.wid)].gic_recv[i] = recv_state
                if result.outcome is GicOutcome.DEALER_DISQUALIFIED:
                    disqualified = True
                elif result.outcome is GicOutcome.S_PUBLISHED:
                    try:
                        rows = decode_shares(result.published, c.msp.field, len(c.msp.rows_of(i)))
                    except FieldTooSmall:
                        disqualified = True
                        continue
                    if published.setdefault(i, rows) != rows:
                        disqualified = True
        for i, rows in published.items():
            net.party(i).store[("wss", c.wid)].shares = rows
        if disqualified:
            logger.info(f"{label} {c.wid}: dealer P{c.dealer} disqualified")
            net.annotate("wss.disqualified", c.wid, c.dealer)
        updated.append(replace(c, public_shares=tuple(sorted(published.items())), disqualified=disqualified))
    return updated


def wss_commit_batch(net: Network, msp: Msp, k: int,
                     deals: Sequence[Tuple[int, Optional[FieldElement]]]) -> List[WssCommitment]:
    """
    WSS(D, a) for every (dealer, value) pair at once. A value of None means
    the dealer has nothing to share and deals nothing.
    """
    handles = [_base_handle(net, dealer, msp, k) for dealer, _ in deals]
    values = {c.wid: value for c, (_, value) in zip(handles, deals)}
    by_dealer: Dict[int, List[WssCommitment]] = {}
    for c in handles:
        by_dealer.setdefault(c.dealer, []).append(c)

    def deal(party: Party):
        out = []
        for c in by_dealer.get(party.index, ()):
            value = values[c.wid]
            if value is None:
                continue
            a_star, alpha = share(msp, value, rng=party.stream)
            dealt = party.deviate("wss.shares", alpha.entries, wid=c.wid)
            party.store[("wss", c.wid)] = WssLocal(_rows(msp, dealt, party.index), a_star=a_star, dealt=dealt)
            for p in msp.players:
                if p != party.index:
                    out.append((p, "wss.share", (c.wid, _rows(msp, dealt, p))))
        return out

    delivery = net.exchange("wss.share", deal)
    for c in handles:
        for p in msp.players:
            if p == c.dealer and ("wss", c.wid) in net.party(p).store:
                continue
            got = delivery.get("wss.share", c.dealer, c.wid, p)
            rows = as_vector(got[0], msp.field, len(msp.rows_of(p))) if got else None
            net.party(p).store[("wss", c.wid)] = WssLocal(rows)
    return _authenticate_all(net, handles, "WSS")


def wss_commit(net: Network, dealer: int, a: FieldElement, msp: Msp, k: int) -> WssCommitment:
    c = wss_commit_batch(net, msp, k, [(dealer, a)])[0]
    if c.disqualified:
        raise DealerDisqualified(dealer, f"WSS {c.wid} dispute left unresolved")
    return c


def _accepted_rows(net: Network, c: WssCommitment, receiver: int, sender: int,
                   delivery) -> Optional[Vector]:
    """Rows of `sender` that `receiver` accepts after authentication, or None"""
    public = c.public_rows(sender)
    if public is not None:
        return public
    record = local(net, c, receiver)
    if sender == receiver:
        return record.shares if record is not None else None
    got = delivery.get("wss.auth", sender, c.wid, receiver)
    if got is None or record is None or sender not in record.gic_recv or len(got) != 2:
        return None
    claimed = as_element(got[0], c.auth_field)
    raw_keys = got[1]
    if claimed is None or not isinstance(raw_keys, tuple):
        return None
    keys = []
    for item in raw_keys:
        if not isinstance(item, tuple) or len(item) != 2 or not isinstance(item[0], int):
            return None
        y = as_element(item[1], c.auth_field)
        if y is None:
            return None
        keys.append((item[0], y))
    state = record.gic_recv[sender]
    if not gic_authenticate(GicIntState(claimed, tuple(keys), state.path), state, claimed):
        return None
    try:
        original = decode_shares(claimed / c.f_factor, c.msp.field, len(c.msp.rows_of(sender)))
    except FieldTooSmall:
        return None
    return tuple(v * c.k_factor for v in original)


def wss_open_batch(net: Network, commitments: Sequence[WssCommitment],
                   audience: Optional[int] = None) -> List[WssOpening]:
    """
    WSS-OPEN for every commitment at once, publicly or only to `audience`.
    Under a single audience the other players output nothing, which is
    reported as the audience's result.
    """
    live = [c for c in commitments if not c.trivial and not c.disqualified]
    by_dealer: Dict[int, List[WssCommitment]] = {}
    for c in live:
        by_dealer.setdefault(c.dealer, []).append(c)

    # 1. D broadcasts a_*
    def reveal(party: Party):
        out = []
        for c in by_dealer.get(party.index, ()):
            record = party.store.get(("wss", c.wid))
            if record is None or record.a_star is None:
                continue
            coords = party.deviate("wss.open.a_star", record.a_star.coords, wid=c.wid)
            out.append((None, "wss.a_star", (c.wid, coords)))
        return out

    a_stars: Dict[str, Optional[ExtendedSecret]] = {}
    if live:
        delivery = net.exchange("wss.open.reveal", reveal)
        for c in live:
            got = delivery.get("wss.a_star", c.dealer, c.wid)
            coords = as_vector(got[0], c.msp.field, c.msp.e) if got else None
            a_stars[c.wid] = ExtendedSecret(coords) if coords is not None else None
    openable = [c for c in live if a_stars[c.wid] is not None]

    # 2. every P_i authenticates its shares towards P_j
    def authenticate(party: Party):
        out = []
        for c in openable:
            if c.public_rows(party.index) is not None:
                continue
            record = party.store.get(("wss", c.wid))
            if record is None:
                continue
            targets = c.msp.players if audience is None else (audience,)
            for j in targets:
                state = record.gic_int.get(j)
                if j == party.index or state is None or state.s is None:
                    continue
                claimed, keys = party.deviate("gic.auth.claim", (state.s, state.keys), wid=c.wid, receiver=j)
                out.append((j, "wss.auth", (c.wid, claimed, keys)))
        return out

    complaints: Dict[str, Dict[int, bool]] = {}
    if openable:
        delivery = net.exchange("wss.open.auth", authenticate)
        for c in openable:
            receivers = c.msp.players if audience is None else (audience,)
            complaints[c.wid] = {
                j: _finds_inconsistency(net, c, j, a_stars[c.wid], delivery) for j in receivers
            }

    # 3. accusations
    accusers: Dict[str, FrozenSet[int]] = {}
    if openable and audience is None:
        def accuse(party: Party):
            out = []
            for c in openable:
                accusing = party.deviate("wss.accuse", bool(complaints[c.wid].get(party.index)), wid=c.wid)
                if accusing:
                    out.append((None, "wss.accuse", (c.wid,)))
            return out

        delivery = net.exchange("wss.open.accuse", accuse)
        for c in openable:
            accusers[c.wid] = frozenset(
                j for j in c.msp.players if delivery.get("wss.accuse", j, c.wid) is not None
            )

    results = []
    for c in commitments:
        if c.trivial:
            opening = WssOpening(c.wid, c.msp.field.zero)
        elif c.disqualified or a_stars.get(c.wid) is None:
            opening = WssOpening(c.wid, None)
        elif audience is not None:
            value = None if complaints[c.wid][audience] else a_stars[c.wid].secret
            opening = WssOpening(c.wid, value)
        else:
            who = accusers[c.wid]
            if qualified(c.msp, who):
                logger.info(f"WSS {c.wid}: accusers {sorted(who)} are qualified, P{c.dealer} disqualified")
                opening = WssOpening(c.wid, None, who)
            else:
                opening = WssOpening(c.wid, a_stars[c.wid].secret, who)
        net.annotate("wss.open", c.wid, c.dealer, opening.value, tuple(sorted(opening.accusers)))
        results.append(opening)
    return results


def _finds_inconsistency(net: Network, c: WssCommitment, receiver: int, a_star: ExtendedSecret,
                         delivery) -> bool:
    for sender in c.msp.players:
        rows = _accepted_rows(net, c, receiver, sender, delivery)
        if rows is None:
            continue
        for l, value in zip(c.msp.rows_of(sender), rows):
            if not check_row(c.msp, a_star, l, value):
                return True
    return False


def wss_open(net: Network, c: WssCommitment, audience: Optional[int] = None) -> WssOpening:
    return wss_open_batch(net, [c], audience)[0]


def _parse_report(raw, c: WssCommitment) -> Dict[int, Vector]:
    rows: Dict[int, Vector] = {}
    if not isinstance(raw, tuple):
        return rows
    for item in raw:
        if not isinstance(item, tuple) or len(item) != 2 or item[0] not in c.msp.players:
            continue
        parsed = as_vector(item[1], c.msp.field, len(c.msp.rows_of(item[0])))
        if parsed is not None:
            rows.setdefault(item[0], parsed)
    return rows


def wss_recover_batch(net: Network, commitments: Sequence[WssCommitment]) -> List[Optional[FieldElement]]:
    """
    Value of every commitment without its dealer. Each player authenticates
    its shares as in WSS-OPEN, every receiver broadcasts the rows it accepted,
    and a sender's rows count once a qualified set of receivers reports them.
    The accepted rows must fit one extended secret; otherwise the value is None.
    """
    live = [c for c in commitments if not c.trivial and not c.disqualified]

    def authenticate(party: Party):
        out = []
        for c in live:
            if c.public_rows(party.index) is not None:
                continue
            record = party.store.get(("wss", c.wid))
            if record is None:
                continue
            for j in c.msp.players:
                state = record.gic_int.get(j)
                if j == party.index or state is None or state.s is None:
                    continue
                claimed, keys = party.deviate("gic.auth.claim", (state.s, state.keys), wid=c.wid, receiver=j)
                out.append((j, "wss.auth", (c.wid, claimed, keys)))
        return out

    accepted: Dict[Tuple[str, int], Dict[int, Vector]] = {}
    if live:
        delivery = net.exchange("wss.recover.auth", authenticate)
        for c in live:
            for j in c.msp.players:
                rows = {}
                for sender in c.msp.players:
                    got = _accepted_rows(net, c, j, sender, delivery)
                    if got is not None:
                        rows[sender] = got
                accepted[(c.wid, j)] = rows

    def report(party: Party):
        out = []
        for c in live:
            rows = tuple(sorted(accepted[(c.wid, party.index)].items()))
            rows = party.deviate("wss.recover.rows", rows, wid=c.wid)
            out.append((None, "wss.rows", (c.wid, rows)))
        return out

    reports = net.exchange("wss.recover.report", report) if live else None
    results = []
    for c in commitments:
        if c.trivial:
            results.append(c.msp.field.zero)
            continue
        if c.disqualified:
            results.append(None)
            continue
        votes: Dict[Tuple[int, Vector], set] = {}
        for j in c.msp.players:
            got = reports.get("wss.rows", j, c.wid)
            for sender, rows in _parse_report(got[0] if got else None, c).items():
                votes.setdefault((sender, rows), set()).add(j)
        fixed: Dict[int, Vector] = {}
        for (sender, rows), receivers in sorted(votes.items(), key=lambda item: item[0][0]):
            if sender not in fixed and qualified(c.msp, receivers):
                fixed[sender] = rows
        value = None
        if fixed and qualified(c.msp, fixed):
            used = [l for p in sorted(fixed) for l in c.msp.rows_of(p)]
            values = [v for p in sorted(fixed) for v in fixed[p]]
            if solve_linear(c.msp.field, [c.msp.matrix[l] for l in used], values) is not None:
                entries: List[Optional[FieldElement]] = [None] * c.msp.d
                for l, v in zip(used, values):
                    entries[l] = v
                chosen = smallest_qualified(c.msp, fixed)
                value = reconstruct(c.msp, ShareVector(c.msp, tuple(entries)), chosen)
        if value is None:
            logger.info(f"WSS {c.wid}: shares of P{c.dealer} could not be recovered")
        net.annotate("wss.recover", c.wid, c.dealer, value)
        results.append(value)
    return results


def _copy_locals(net: Network, source: WssCommitment, target: WssCommitment, transform=None):
    for party in net.parties:
        record = party.store.get(("wss", source.wid))
        if record is None:
            continue
        party.store[("wss", target.wid)] = transform(record) if transform else WssLocal(
            record.shares, dict(record.gic_int), dict(record.gic_recv), record.a_star, record.dealt
        )


def trivial_commitment(net: Network, dealer: int, msp: Msp, k: int) -> WssCommitment:
    """Canonical commitment to 0: all shares 0, opens without communication"""
    c = replace(_base_handle(net, dealer, msp, k), trivial=True)
    zero = msp.field.zero
    for party in net.parties:
        record = WssLocal(tuple(zero for _ in msp.rows_of(party.index)))
        if party.index == dealer:
            record.a_star = ExtendedSecret((zero,) * msp.e)
            record.dealt = (zero,) * msp.d
        party.store[("wss", c.wid)] = record
    return c


def wss_scale(net: Network, c: WssCommitment, factor) -> WssCommitment:
    """[factor * a]^W_D, computed locally"""
    K = c.msp.field
    factor = K(int(factor))
    if factor == 0 or c.trivial:
        return trivial_commitment(net, c.dealer, c.msp, c.k)
    lifted = FieldElement(factor.value, c.auth_field)
    scaled = _new_handle(
        net, c,
        k_factor=c.k_factor * factor,
        f_factor=c.f_factor * lifted,
        public_shares=tuple((p, tuple(v * factor for v in rows)) for p, rows in c.public_shares),
    )

    def transform(record: WssLocal) -> WssLocal:
        return WssLocal(
            tuple(v * factor for v in record.shares) if record.shares is not None else None,
            {j: scale_int_state(s, lifted) for j, s in record.gic_int.items()},
            {i: scale_recv_state(s, lifted) for i, s in record.gic_recv.items()},
            record.a_star.scale(factor) if record.a_star is not None else None,
            tuple(v * factor for v in record.dealt) if record.dealt is not None else None,
        )

    _copy_locals(net, c, scaled, transform)
    return scaled


def _check_addable(c1: WssCommitment, c2: WssCommitment):
    if c1.dealer != c2.dealer:
        raise DealerMismatch(f"cannot add WSS of P{c1.dealer} and P{c2.dealer}")
    if c1.msp != c2.msp:
        raise MspMismatch("WSS commitments use different MSPs")


def wss_add_batch(net: Network, pairs: Sequence[Tuple[WssCommitment, WssCommitment]]) -> List[WssCommitment]:
    """[a + b]^W_D for every pair: local sums, then fresh checks on the sums"""
    for c1, c2 in pairs:
        _check_addable(c1, c2)
    results: List[Optional[WssCommitment]] = []
    fresh: List[WssCommitment] = []
    for c1, c2 in pairs:
        if c1.disqualified or c2.disqualified:
            results.append(_new_handle(net, c1, disqualified=True, trivial=False))
            continue
        if c1.trivial or c2.trivial:
            keep = c2 if c1.trivial else c1
            copy = _new_handle(net, keep)
            _copy_locals(net, keep, copy)
            results.append(copy)
            continue
        c = _base_handle(net, c1.dealer, c1.msp, c1.k)
        public1, public2 = dict(c1.public_shares), dict(c2.public_shares)
        for party in net.parties:
            r1 = party.store.get(("wss", c1.wid))
            r2 = party.store.get(("wss", c2.wid))
            shares = None
            if r1 is not None and r2 is not None and r1.shares is not None and r2.shares is not None:
                shares = tuple(x + y for x, y in zip(r1.shares, r2.shares))
            record = WssLocal(shares)
            if party.index == c.dealer and r1 is not None and r2 is not None:
                if r1.a_star is not None and r2.a_star is not None:
                    record.a_star = r1.a_star + r2.a_star
                    record.dealt = tuple(x + y for x, y in zip(r1.dealt, r2.dealt))
            party.store[("wss", c.wid)] = record
        both_public = tuple(
            (p, tuple(x + y for x, y in zip(public1[p], public2[p])))
            for p in sorted(set(public1) & set(public2))
        )
        c = replace(c, public_shares=both_public)
        results.append(None)
        fresh.append(c)

    authenticated = iter(_authenticate_all(net, fresh, "WSS sum"))
    return [r if r is not None else next(authenticated) for r in results]


def wss_add(net: Network, c1: WssCommitment, c2: WssCommitment) -> WssCommitment:
    return wss_add_batch(net, [(c1, c2)])[0]


def wss_prove_correct(net: Network, c: WssCommitment, k: int) -> bool:
    """
    k rounds of: dealer commits a random b, everyone forms [a + b], a rotating
    player's coin picks which of b or a + b the dealer opens.
    """
    K = c.msp.field
    for it in range(k):
        dealer = net.party(c.dealer)
        b = dealer.stream.element(K) if not dealer.silenced else None
        (blind,) = wss_commit_batch(net, c.msp, c.k, [(c.dealer, b)])
        masked = wss_add(net, c, blind)
        coin = coin_flip(net, it % net.n, ("wss", c.wid, it))
        opening = wss_open(net, blind if coin == 1 else masked)
        if opening.null:
            logger.info(f"WSS {c.wid}: proof round {it} failed")
            return False
    return True
