"""
Verifiable secret sharing by cut-and-choose over WSS-committed shares.

Every row l of a VssCommitment is a pair (WSS part, public offset): the row's
value is the value committed by the WSS part (owned by the row's player) plus
the offset. Rows of removed players have no WSS part; their value is public.

Coin convention: 1 is heads (open the blinding), 0 is tails (open secret + blinding).
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from src.errors import DealerCorrupt, DealerRefused, MspMismatch, ReconstructionImpossible
from src.field import FieldElement, as_vector
from src.msp import ExtendedSecret, Msp, ShareVector, qualified, reconstruct, share, smallest_qualified, solve_linear
from src.simnet.network import Network, Party, coin_flip
from src.wss import (
    WssCommitment,
    dealer_secret,
    local as wss_local,
    wss_add_batch,
    wss_commit_batch,
    wss_open_batch,
    wss_recover_batch,
    wss_scale,
)

logger = logging.getLogger(__name__)

Vector = Tuple[FieldElement, ...]
HEADS = 1


@dataclass(frozen=True)
class VssRow:
    wss: Optional[WssCommitment]
    offset: FieldElement

    @property
    def public(self) -> bool:
        return self.wss is None


@dataclass(frozen=True)
class VssCommitment:
    vid: str
    msp: Msp
    owner: Optional[int]
    rows: Tuple[VssRow, ...]
    k: int

    @property
    def removed(self) -> FrozenSet[int]:
        return frozenset(
            p for p in self.msp.players if all(self.rows[l].public for l in self.msp.rows_of(p))
        )

    @property
    def public_shares(self) -> Dict[int, FieldElement]:
        return {l: row.offset for l, row in enumerate(self.rows) if row.public}


@dataclass
class _DealerRecord:
    a_star: ExtendedSecret
    alpha: Vector
    c_stars: List[ExtendedSecret]
    gammas: List[Vector]


@dataclass
class _Run:
    """Public bookkeeping of one VSS execution"""

    vid: str
    dealer: int
    msp: Msp
    k: int
    rounds: int
    removed: set = field(default_factory=set)
    public_alpha: Dict[int, Vector] = field(default_factory=dict)
    public_gamma: Dict[int, List[Vector]] = field(default_factory=dict)
    challenges: List[Tuple[int, int, ExtendedSecret]] = field(default_factory=list)


def _rows(msp: Msp, values: Sequence[FieldElement], player: int) -> Vector:
    return tuple(values[l] for l in msp.rows_of(player))


def _beta(alpha: Vector, gamma: Vector, coin: int) -> Vector:
    return gamma if coin == HEADS else tuple(x + y for x, y in zip(alpha, gamma))


def _matches(msp: Msp, player: int, values: Vector, b_star: ExtendedSecret) -> bool:
    expected = _rows(msp, msp.apply(b_star.coords), player)
    return tuple(values) == expected


def _publicly_consistent(run: _Run, player: int) -> bool:
    alpha, gammas = run.public_alpha[player], run.public_gamma[player]
    return all(
        _matches(run.msp, player, _beta(alpha, gammas[j], coin), b_star)
        for j, coin, b_star in run.challenges
    )


def _publish(net: Network, run: _Run, players: Sequence[int], reason: str):
    """Remove `players`; the dealer must broadcast everything it gave them"""
    fresh = sorted(set(players) - run.removed)
    if not fresh:
        return
    logger.info(f"VSS {run.vid}: removing {fresh} ({reason})")
    net.annotate("vss.removed", run.vid, tuple(fresh), reason)
    msp, iid = run.msp, run.vid

    def publish(party: Party):
        if party.index != run.dealer:
            return ()
        record = party.store.get(("vss.dealer", iid))
        if record is None:
            return ()
        return [
            (None, "vss.data", (f"{iid}/{p}", _rows(msp, record.alpha, p),
                                tuple(_rows(msp, g, p) for g in record.gammas)))
            for p in fresh
        ]

    delivery = net.exchange("vss.publish", publish)
    for p in fresh:
        got = delivery.get("vss.data", run.dealer, f"{iid}/{p}")
        width = len(msp.rows_of(p))
        alpha = as_vector(got[0], msp.field, width) if got else None
        gammas = got[1] if got else None
        if alpha is None or not isinstance(gammas, tuple) or len(gammas) != run.rounds:
            raise DealerCorrupt(run.dealer, f"did not publish the data of P{p}")
        parsed = [as_vector(g, msp.field, width) for g in gammas]
        if any(g is None for g in parsed):
            raise DealerCorrupt(run.dealer, f"published malformed data for P{p}")
        run.public_alpha[p] = alpha
        run.public_gamma[p] = parsed
        run.removed.add(p)
        if not _publicly_consistent(run, p):
            raise DealerCorrupt(run.dealer, f"published data of P{p} contradicts b_*")
    if qualified(msp, run.removed):
        raise DealerCorrupt(run.dealer, f"removed set {sorted(run.removed)} is qualified")


def _run_vss(net: Network, dealer: int, msp: Msp, k: int, secret: Optional[FieldElement] = None,
             source: Optional[WssCommitment] = None, refusing: bool = False) -> VssCommitment:
    """
    VSS(D, a) from step 1, or from step 2 when `source` holds the shares of an
    existing WSS commitment of D.
    """
    n = net.n
    rounds = k * n
    vid = net.next_id("vss")
    run = _Run(vid, dealer, msp, k, rounds)
    net.count_bounded_check()
    K = msp.field

    # dealer's private choices
    dealer_party = net.party(dealer)
    if not dealer_party.silenced:
        if source is None:
            a_star, alpha_vec = share(msp, secret, rng=dealer_party.stream)
            alpha = dealer_party.deviate("vss.shares", alpha_vec.entries, vid=vid)
        else:
            record = wss_local(net, source, dealer)
            if record is None or record.a_star is None:
                refusing = True
            else:
                a_star, alpha = record.a_star, record.dealt
    if not refusing and not dealer_party.silenced:
        c_stars, gammas = [], []
        for j in range(rounds):
            c_star, gamma = share(msp, dealer_party.stream.element(K), rng=dealer_party.stream)
            c_stars.append(c_star)
            gammas.append(dealer_party.deviate("vss.blinding", gamma.entries, vid=vid, round=j))
        dealer_party.store[("vss.dealer", vid)] = _DealerRecord(a_star, alpha, c_stars, gammas)

    # 1, 3a-b. shares of a and of every blinding value c^(j)
    def deal(party: Party):
        record = party.store.get(("vss.dealer", vid)) if party.index == dealer else None
        if record is None:
            return ()
        out = []
        for p in msp.players:
            if p == dealer:
                continue
            alpha_rows = _rows(msp, record.alpha, p) if source is None else ()
            out.append((p, "vss.share", (vid, alpha_rows, tuple(_rows(msp, g, p) for g in record.gammas))))
        return out

    delivery = net.exchange("vss.share", deal)
    held_alpha: Dict[int, Optional[Vector]] = {}
    held_gamma: Dict[int, Optional[List[Vector]]] = {}
    for p in msp.players:
        width = len(msp.rows_of(p))
        if p == dealer:
            record = net.party(p).store.get(("vss.dealer", vid))
            held_alpha[p] = _rows(msp, record.alpha, p) if record else None
            held_gamma[p] = [_rows(msp, g, p) for g in record.gammas] if record else None
            continue
        got = delivery.get("vss.share", dealer, vid, p)
        if source is not None:
            mine = wss_local(net, source, p)
            held_alpha[p] = mine.shares if mine is not None else None
        else:
            held_alpha[p] = as_vector(got[0], K, width) if got else None
        gammas = None
        if got and isinstance(got[1], tuple) and len(got[1]) == rounds:
            parsed = [as_vector(g, K, width) for g in got[1]]
            gammas = None if any(g is None for g in parsed) else parsed
        held_gamma[p] = gammas

    # missing data: complain, and the dealer must publish; silenced players count as complainers
    def complain(party: Party):
        if held_alpha[party.index] is None or held_gamma[party.index] is None:
            return [(None, "vss.complain", (vid,))]
        return ()

    delivery = net.exchange("vss.complain", complain)
    complainers = [
        p for p in msp.players
        if net.party(p).silenced or delivery.get("vss.complain", p, vid) is not None
    ]
    _publish(net, run, complainers, "missing data")

    # 2, 3c. every share holder WSS-commits its shares and forms the masked sums
    active = [p for p in msp.players if p not in run.removed]
    rows = [l for p in active for l in msp.rows_of(p)]
    deals = []
    for p in active:
        alpha, gammas = held_alpha[p], held_gamma[p]
        for slot, l in enumerate(msp.rows_of(p)):
            deals.append((p, alpha[slot] if alpha else None))
            deals.extend((p, gammas[j][slot] if gammas else None) for j in range(rounds))
    committed = iter(wss_commit_batch(net, msp, k, deals))
    alpha_w: Dict[int, WssCommitment] = {}
    gamma_w: Dict[Tuple[int, int], WssCommitment] = {}
    for l in rows:
        alpha_w[l] = next(committed)
        for j in range(rounds):
            gamma_w[(j, l)] = next(committed)
    sums = wss_add_batch(net, [(gamma_w[(j, l)], alpha_w[l]) for l in rows for j in range(rounds)])
    sum_w = {(j, l): c for (l, j), c in zip(((l, j) for l in rows for j in range(rounds)), sums)}
    failed = {msp.owners[l] for l in rows if alpha_w[l].disqualified
              or any(gamma_w[(j, l)].disqualified for j in range(rounds))}
    _publish(net, run, sorted(failed), "WSS commitment failed")

    # 4. challenge rounds
    for j in range(rounds):
        coin = coin_flip(net, j % n, ("vss", vid, j))

        def broadcast_b_star(party: Party):
            record = party.store.get(("vss.dealer", vid)) if party.index == dealer else None
            if record is None:
                return ()
            b_star = record.c_stars[j] if coin == HEADS else record.a_star + record.c_stars[j]
            coords = party.deviate("vss.b_star", b_star.coords, vid=vid, round=j)
            return [(None, "vss.b_star", (vid, coords))]

        delivery = net.exchange("vss.challenge", broadcast_b_star)
        got = delivery.get("vss.b_star", dealer, vid)
        coords = as_vector(got[0], K, msp.e) if got else None
        if coords is None:
            raise DealerCorrupt(dealer, f"no b_* in challenge round {j}")
        b_star = ExtendedSecret(coords)
        run.challenges.append((j, coin, b_star))
        for p in sorted(run.removed):
            if not _publicly_consistent(run, p):
                raise DealerCorrupt(dealer, f"b_* of round {j} contradicts the public shares of P{p}")

        def accuse(party: Party):
            p = party.index
            if p in run.removed or held_alpha[p] is None or held_gamma[p] is None:
                return ()
            beta = _beta(held_alpha[p], held_gamma[p][j], coin)
            if not _matches(msp, p, beta, b_star):
                return [(None, "vss.accuse", (vid,))]
            return ()

        delivery = net.exchange("vss.accuse", accuse)
        accusers = [p for p in msp.players if p not in run.removed
                    and delivery.get("vss.accuse", p, vid) is not None]
        _publish(net, run, accusers, f"accused the dealer in round {j}")

        opened_rows = [l for l in rows if msp.owners[l] not in run.removed]
        to_open = [gamma_w[(j, l)] if coin == HEADS else sum_w[(j, l)] for l in opened_rows]
        openings = wss_open_batch(net, to_open)
        expected = msp.apply(b_star.coords)
        caught = sorted({
            msp.owners[l] for l, opening in zip(opened_rows, openings)
            if opening.null or opening.value != expected[l]
        })
        _publish(net, run, caught, f"failed to open beta in round {j}")

    # 5. success test (the removed set is checked on every removal)
    result_rows = []
    for l in range(msp.d):
        owner = msp.owners[l]
        if owner in run.removed:
            slot = msp.rows_of(owner).index(l)
            result_rows.append(VssRow(None, run.public_alpha[owner][slot]))
        else:
            result_rows.append(VssRow(alpha_w[l], K.zero))
    commitment = VssCommitment(vid, msp, dealer, tuple(result_rows), k)
    net.annotate("vss.dealt", vid, dealer, tuple(sorted(run.removed)))
    return commitment


def vss_deal(net: Network, dealer: int, a: FieldElement, msp: Msp, k: int) -> VssCommitment:
    """VSS(D, a); raises DealerCorrupt when the dealer is caught"""
    return _run_vss(net, dealer, msp, k, secret=msp.field(int(a)))


def wss_to_vss(net: Network, c: WssCommitment) -> VssCommitment:
    """[a]^W_D -> [a]^V_D, entering VSS at step 2 with the WSS shares; needs the dealer"""
    if c.disqualified:
        raise DealerRefused(c.dealer, f"WSS {c.wid} was disqualified")
    if c.trivial:
        return vss_public(net, c.msp, c.msp.field.zero, c.k, owner=c.dealer)
    dealer = net.party(c.dealer)
    refusing = dealer.refuses("convert", wid=c.wid)
    try:
        return _run_vss(net, c.dealer, c.msp, c.k, source=c, refusing=refusing)
    except DealerCorrupt as e:
        logger.info(f"conversion of {c.wid} failed: {e.reason}")
        raise DealerRefused(c.dealer, e.reason) from e


def vss_open_batch(net: Network, commitments: Sequence[VssCommitment]) -> List[FieldElement]:
    """VSS-OPEN of every commitment; row owners open their WSS parts, the dealer is not needed"""
    pending = []
    for c in commitments:
        for l, row in enumerate(c.rows):
            if row.wss is not None and not row.wss.trivial:
                pending.append((c.vid, l, row.wss))
    openings = wss_open_batch(net, [w for _, _, w in pending]) if pending else []
    opened = {(vid, l): o.value for (vid, l, _), o in zip(pending, openings)}

    values = []
    for c in commitments:
        K = c.msp.field
        row_values: List[Optional[FieldElement]] = []
        for l, row in enumerate(c.rows):
            if row.wss is None:
                row_values.append(row.offset)
            elif row.wss.trivial:
                row_values.append(row.offset)
            else:
                v = opened[(c.vid, l)]
                row_values.append(v + row.offset if v is not None else None)
        available = [
            p for p in c.msp.players if all(row_values[l] is not None for l in c.msp.rows_of(p))
        ]
        chosen = smallest_qualified(c.msp, available)
        if chosen is None:
            raise ReconstructionImpossible(f"VSS {c.vid}: no qualified set among {available}")
        value = reconstruct(c.msp, ShareVector(c.msp, tuple(row_values)), chosen)
        net.annotate("vss.open", c.vid, value, chosen)
        values.append(K(int(value)))
    return values


def vss_open(net: Network, c: VssCommitment) -> FieldElement:
    return vss_open_batch(net, [c])[0]


def vss_publish_silenced(net: Network, commitments: Sequence[VssCommitment]) -> List[VssCommitment]:
    """
    Rows whose owner is silenced become public, recovered from the other
    players' authenticated shares. A row that cannot be recovered keeps its
    WSS part, so converting it later fails like a refusal.
    """
    pending = []
    for index, c in enumerate(commitments):
        for l, row in enumerate(c.rows):
            if row.wss is not None and net.party(c.msp.owners[l]).silenced:
                pending.append((index, l))
    if not pending:
        return list(commitments)
    values = wss_recover_batch(net, [commitments[i].rows[l].wss for i, l in pending])
    rows = [list(c.rows) for c in commitments]
    for (index, l), value in zip(pending, values):
        if value is not None:
            rows[index][l] = VssRow(None, value + rows[index][l].offset)
    touched = {index for index, _ in pending}
    return [
        replace(c, vid=net.next_id("vss"), rows=tuple(rows[i])) if i in touched else c
        for i, c in enumerate(commitments)
    ]


def vss_linear(net: Network, terms: Sequence[Tuple[object, VssCommitment]]) -> VssCommitment:
    """sum of lambda_i [a_i]^V, row by row; the result belongs to no one"""
    if not terms:
        raise ValueError("need at least one term")
    msp, k = terms[0][1].msp, terms[0][1].k
    for _, c in terms:
        if c.msp != msp:
            raise MspMismatch("VSS commitments use different MSPs")
    if net.silenced:
        published = vss_publish_silenced(net, [c for _, c in terms])
        terms = [(lam, c) for (lam, _), c in zip(terms, published)]
    K = msp.field
    coefficients = [K(int(lam)) for lam, _ in terms]

    offsets = []
    parts: List[List[WssCommitment]] = []
    for l in range(msp.d):
        offset = K.zero
        row_parts = []
        for lam, (_, c) in zip(coefficients, terms):
            row = c.rows[l]
            offset = offset + lam * row.offset
            if row.wss is not None and lam != 0 and not row.wss.trivial:
                row_parts.append(wss_scale(net, row.wss, lam) if lam != 1 else row.wss)
        offsets.append(offset)
        parts.append(row_parts)

    # pairwise sums, one batch per level for all rows
    while any(len(p) > 1 for p in parts):
        pairs, slots = [], []
        for l, p in enumerate(parts):
            if len(p) > 1:
                pairs.append((p[0], p[1]))
                slots.append(l)
        for l, summed in zip(slots, wss_add_batch(net, pairs)):
            parts[l] = [summed] + parts[l][2:]

    rows = tuple(VssRow(p[0] if p else None, off) for p, off in zip(parts, offsets))
    return VssCommitment(net.next_id("vss"), msp, None, rows, k)


def vss_add_constant(net: Network, c: VssCommitment, constant) -> VssCommitment:
    """[a + constant]^V: shares of the constant are constant * M_l0"""
    K = c.msp.field
    lam = K(int(constant))
    rows = tuple(
        VssRow(row.wss, row.offset + lam * c.msp.matrix[l][0]) for l, row in enumerate(c.rows)
    )
    return VssCommitment(net.next_id("vss"), c.msp, c.owner, rows, c.k)


def vss_public(net: Network, msp: Msp, value, k: int, owner: Optional[int] = None) -> VssCommitment:
    """Commitment to a publicly known value"""
    v = msp.field(int(value))
    rows = tuple(VssRow(None, v * msp.matrix[l][0]) for l in range(msp.d))
    return VssCommitment(net.next_id("vss"), msp, owner, rows, k)


def owner_value(net: Network, c: VssCommitment, row: int) -> Optional[FieldElement]:
    """The value row `row` holds, as its owner knows it"""
    entry = c.rows[row]
    if entry.wss is None:
        return entry.offset
    secret = dealer_secret(net, entry.wss)
    return secret + entry.offset if secret is not None else None


def audit_consistency(net: Network, c: VssCommitment) -> bool:
    """
    Simulator-side check that the committed top-level shares fit one extended
    secret. Not part of the protocol: it reads every party's private state.
    """
    msp = c.msp
    used, values = [], []
    for l in range(msp.d):
        v = owner_value(net, c, l)
        if v is not None:
            used.append(l)
            values.append(v)
    if not used:
        return True
    return solve_linear(msp.field, [msp.matrix[l] for l in used], values) is not None
