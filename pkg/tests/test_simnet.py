from dataclasses import dataclass, field
from typing import List

import pytest

from src.errors import PlayerOutOfRange, ProtocolAbort, UnknownStrategy
from src.field import FieldSpec
from src.simnet import (
    STRATEGIES,
    AdversaryScript,
    Network,
    RandomStream,
    ScriptedStream,
    Strategy,
    coin_flip,
    parse_strategy,
    run_protocol,
    view_of,
)


def _hello(party):
    return [(None, "hello", ("h", party.index))]


def test_exchange_delivers_broadcasts_and_private_messages(make_net):
    net = make_net()

    def outbox(party):
        return [(None, "b", ("x", party.index)), ((party.index + 1) % 3, "p", ("y", party.index * 10))]

    delivery = net.exchange("test.round", outbox)
    assert delivery.get("b", 2, "x") == (2,)
    assert delivery.get("p", 0, "y", 1) == (0,)
    assert delivery.get("p", 0, "y", 2) is None
    assert [m.sender for m in delivery.messages] == sorted(m.sender for m in delivery.messages)
    assert net.round == 1


def test_rushing_adversary_sees_honest_messages_first(make_net):
    net = make_net(corrupt=[2])
    seen = {}

    def outbox(party):
        if party.corrupt:
            seen["rushed"] = [(m.sender, m.payload) for m in party.rushed]
        return _hello(party)

    net.exchange("test.rush", outbox)
    assert seen["rushed"] == [(0, ("h", 0)), (1, ("h", 1))]


def test_non_rushing_adversary_sees_nothing(make_net):
    net = make_net(corrupt=[2], rushing=False)
    seen = {}

    def outbox(party):
        if party.corrupt:
            seen["rushed"] = list(party.rushed)
        return _hello(party)

    net.exchange("test.rush", outbox)
    assert seen["rushed"] == []


def test_silenced_players_send_nothing(make_net):
    net = make_net()
    net.silence(1)
    delivery = net.exchange("test.silent", _hello)
    assert delivery.get("hello", 1, "h") is None
    assert delivery.get("hello", 0, "h") == (0,)
    assert net.transcript.annotations_of("silenced") == [(1,)]


def test_coin_flip_missing_bit_reads_as_zero(make_net):
    net = make_net()
    net.silence(0)
    assert coin_flip(net, 0, ("test", 0)) == 0


class _AlwaysHeads(Strategy):
    name = "always_heads"

    def deviate(self, party, hook, value, context):
        return 1 if hook == "coin" else value


def test_corrupt_flipper_chooses_its_coin():
    net = Network(3, AdversaryScript(frozenset({1}), _AlwaysHeads()), seed=5)
    assert all(coin_flip(net, 1, ("test", j)) == 1 for j in range(10))


def test_transcripts_are_deterministic_per_seed(make_net):
    def run(seed):
        net = make_net(seed=seed)
        for j in range(4):
            coin_flip(net, j % 3, ("test", j))
        net.exchange("test.draw", lambda p: [(None, "v", ("v", int(p.stream.element(FieldSpec(101)))))])
        return net.transcript

    assert run(1).digest() == run(1).digest()
    assert run(1).render() != run(2).render()


def test_stats_count_rounds_and_messages_per_family(make_net):
    net = make_net()
    net.exchange("alpha.one", _hello)
    net.exchange("alpha.two", lambda p: ())
    net.exchange("beta.one", _hello)
    assert net.transcript.stats() == {
        "alpha": {"rounds": 2, "messages": 3},
        "beta": {"rounds": 1, "messages": 3},
    }


def test_fork_is_independent(make_net):
    net = make_net()
    copy = net.fork()
    copy.exchange("test.fork", _hello)
    assert net.round == 0 and copy.round == 1


def test_view_of_keeps_only_the_chosen_players(make_net):
    net = make_net()
    net.exchange("test.view", lambda p: [((p.index + 1) % 3, "p", ("y", p.index))])
    view = view_of(net.transcript, [1])
    assert [m.sender for m in view.messages] == [0]
    assert [p for p, _ in view.seeds] == [1]
    with pytest.raises(PlayerOutOfRange):
        view_of(net.transcript, [3])


def test_corrupt_players_outside_range_are_rejected():
    with pytest.raises(PlayerOutOfRange):
        Network(3, AdversaryScript.of([3]))
    with pytest.raises(ValueError):
        Network(1)


def test_random_streams_are_reproducible():
    F = FieldSpec(2 ** 61 - 1)
    a, b = RandomStream.split(9, 2), RandomStream.split(9, 2)
    assert a[0].vector(F, 5) == b[0].vector(F, 5)
    assert a[0].vector(F, 5) != a[1].vector(F, 5)
    big = FieldSpec(2 ** 127 - 1)
    assert all(0 <= x.value < big.modulus for x in a[1].vector(big, 20))


def test_subset_is_sorted_and_distinct():
    stream = RandomStream.split(4, 1)[0]
    for _ in range(20):
        chosen = stream.subset(8, 4)
        assert len(set(chosen)) == 4 and list(chosen) == sorted(chosen)
    with pytest.raises(ValueError):
        stream.subset(2, 3)


def test_scripted_stream_replays_then_falls_back(gf7):
    stream = ScriptedStream(elements=[3, 4], coins=[1], subsets=[(2, 0)])
    assert stream.element(gf7) == 3
    assert stream.nonzero(gf7) == 4
    assert stream.coin() == 1
    assert stream.subset(4, 2) == (0, 2)
    assert 0 <= stream.coin() <= 1
    with pytest.raises(ValueError):
        ScriptedStream(elements=[0]).nonzero(gf7)


def test_strategy_parsing():
    strategy = parse_strategy("inconsistent_vss_dealer:row=2,delta=3,guess=no")
    assert (strategy.row, strategy.delta, strategy.use_guess) == (2, 3, False)
    assert strategy.describe() == "inconsistent_vss_dealer:delta=3,guess=False,row=2"
    assert set(STRATEGIES) >= {
        "honest", "inconsistent_wss_dealer", "inconsistent_vss_dealer", "forging_intermediary",
        "wrong_product_dealer", "refuse_conversion", "lying_opener",
    }
    for bad in ("nobody", "lying_opener:row=1", "lying_opener:delta=x", "lying_opener:delta"):
        with pytest.raises(UnknownStrategy):
            parse_strategy(bad)


def test_strategy_guesses_are_fixed_per_key():
    strategy = parse_strategy("wrong_product_dealer")
    strategy.bind(RandomStream.split(1, 1)[0])
    first = [strategy.guess(("cp", "c0", j)) for j in range(16)]
    assert first == [strategy.guess(("cp", "c0", j)) for j in range(16)]


@dataclass
class _Echo:
    """Sends its index once, then records what it heard"""

    done: bool = False
    heard: List[int] = field(default_factory=list)
    sent: bool = False

    def step(self, party, round_no, inbox):
        if not self.sent:
            self.sent = True
            return [(None, "echo", ("e", party.index))]
        self.heard = sorted(m.sender for m in inbox)
        self.done = True
        return ()


def test_run_protocol_drives_state_machines():
    machines = [_Echo() for _ in range(3)]
    transcript = run_protocol(machines, seed=1)
    assert all(m.heard == [0, 1, 2] for m in machines)
    assert transcript.rounds == 2


def test_run_protocol_gives_up_after_max_rounds():
    class Forever:
        done = False

        def step(self, party, round_no, inbox):
            return ()

    with pytest.raises(ProtocolAbort):
        run_protocol([Forever(), Forever()], max_rounds=3)
