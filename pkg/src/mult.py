"""
Multiplication of VSS-shared values: per-row products proven by cut-and-choose,
recombined with the MSP's recombination vector.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Set

from src.errors import DealerCorrupt, DealerRefused, InvalidMsp, MspMismatch, ReconstructionImpossible, RestartRequired
from src.field import FieldElement
from src.msp import recombination_vector
from src.simnet.network import Network, coin_flip
from src.vss import (
    HEADS,
    VssCommitment,
    owner_value,
    vss_add_constant,
    vss_deal,
    vss_linear,
    vss_open,
    vss_public,
    vss_publish_silenced,
    wss_to_vss,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProductClaim:
    """`dealer` claims c = a * b for its own commitments"""

    cid: str
    a: VssCommitment
    b: VssCommitment
    c: VssCommitment
    dealer: int


def vss_cp(net: Network, claim: ProductClaim, k: int, known_a: Optional[FieldElement]) -> bool:
    """
    Commitment-product proof: k*n rounds, each with a fresh pair
    [b'], [c' = a b'] and a coin choosing which relation gets opened.
    `known_a` is the dealer's private knowledge of a.
    """
    msp = claim.a.msp
    K = msp.field
    dealer = net.party(claim.dealer)
    for j in range(k * net.n):
        b_prime = dealer.stream.element(K)
        c_prime = (known_a if known_a is not None else K.zero) * b_prime
        c_prime = dealer.deviate("cp.c_prime", c_prime, claim=claim.cid, round=j)
        try:
            blind = vss_deal(net, claim.dealer, b_prime, msp, k)
            blind_product = vss_deal(net, claim.dealer, c_prime, msp, k)
        except DealerCorrupt as e:
            logger.info(f"product proof {claim.cid}: dealing in round {j} failed ({e.reason})")
            return False

        coin = coin_flip(net, j % net.n, ("cp", claim.cid, j))
        try:
            if coin == HEADS:
                opened = vss_open(net, blind)
                net.annotate("cp.opened", claim.cid, "b'", opened)
                check = vss_open(net, vss_linear(net, [(opened, claim.a), (-1, blind_product)]))
            else:
                opened = vss_open(net, vss_linear(net, [(1, claim.b), (1, blind)]))
                net.annotate("cp.opened", claim.cid, "b+b'", opened)
                check = vss_open(net, vss_linear(net, [(opened, claim.a), (-1, blind_product), (-1, claim.c)]))
        except ReconstructionImpossible as e:
            logger.info(f"product proof {claim.cid}: {e}")
            return False
        if check != 0:
            logger.info(f"product proof {claim.cid}: round {j} opened {check} instead of 0")
            return False
    return True


def _convert_rows(net: Network, c: VssCommitment, k: int, refused: Set[int]) -> List[Optional[VssCommitment]]:
    converted: List[Optional[VssCommitment]] = []
    for row in c.rows:
        if row.wss is None:
            converted.append(vss_public(net, c.msp, row.offset, k))
            continue
        try:
            top = wss_to_vss(net, row.wss)
        except DealerRefused as e:
            logger.info(f"P{e.dealer} refused to convert {row.wss.wid}")
            refused.add(e.dealer)
            converted.append(None)
            continue
        converted.append(vss_add_constant(net, top, row.offset))
    return converted


def mult(net: Network, u: VssCommitment, v: VssCommitment, k: int) -> VssCommitment:
    """[u v]^V from [u]^V and [v]^V; raises RestartRequired naming players that refused to convert"""
    if u.msp != v.msp:
        raise MspMismatch("cannot multiply commitments over different MSPs")
    msp = u.msp
    r = recombination_vector(msp)
    if r is None:
        raise InvalidMsp("the MSP has no multiplication property")
    if net.silenced:
        # rows of excluded players become public instead of being converted
        u, v = vss_publish_silenced(net, [u, v])

    # 1. row parts to VSS
    refused: Set[int] = set()
    mus = _convert_rows(net, u, k, refused)
    nus = _convert_rows(net, v, k, refused)
    if refused:
        raise RestartRequired(refused)

    # 2. each row owner commits to its product and proves it
    products: Dict[int, VssCommitment] = {}
    for l in range(msp.d):
        if r[l] == 0:
            continue
        owner = msp.owners[l]
        mu, nu = mus[l], nus[l]
        if u.rows[l].public and v.rows[l].public:
            products[l] = vss_public(net, msp, u.rows[l].offset * v.rows[l].offset, k)
            continue
        cid = net.next_id("cp")
        known_mu, known_nu = owner_value(net, u, l), owner_value(net, v, l)
        proven = False
        party = net.party(owner)
        if not party.silenced and known_mu is not None and known_nu is not None:
            omega = party.deviate("mult.product", known_mu * known_nu, row=l, claim=cid)
            try:
                committed = vss_deal(net, owner, omega, msp, k)
                proven = vss_cp(net, ProductClaim(cid, mu, nu, committed, owner), k, known_mu)
            except DealerCorrupt as e:
                logger.info(f"P{owner} could not commit its product for row {l}: {e.reason}")
        net.annotate("mult.product", cid, l, owner, proven)
        if proven:
            products[l] = committed
            continue
        net.silence(owner)
        opened_mu, opened_nu = vss_open(net, mu), vss_open(net, nu)
        products[l] = vss_public(net, msp, opened_mu * opened_nu, k)

    # 3. recombine
    return vss_linear(net, [(r[l], products[l]) for l in sorted(products)])
