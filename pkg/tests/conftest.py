"""
Shared fixtures: small fields, threshold MSPs and simulated networks
"""
import pytest
from scipy import stats

from src.field import FieldElement, FieldSpec
from src.msp import threshold_msp
from src.simnet.adversary import AdversaryScript
from src.simnet.network import Network, view_of
from src.simnet.randomness import ScriptedStream
from src.structures import AdversaryStructure


@pytest.fixture
def gf7() -> FieldSpec:
    return FieldSpec(7)


@pytest.fixture
def msp3():
    """n=3, t=1 over GF(7): rows (1, i+1)"""
    return threshold_msp(3, 1, 7)


@pytest.fixture
def structure3() -> AdversaryStructure:
    return AdversaryStructure.threshold(3, 1)


@pytest.fixture
def make_net():
    """Network factory: make_net(n, corrupt=(), strategy="honest", seed=0, rushing=True, **params)"""

    def make(n: int = 3, corrupt=(), strategy: str = "honest", seed: int = 0,
             rushing: bool = True, **params) -> Network:
        return Network(n, AdversaryScript.of(corrupt, strategy, rushing, **params), seed)

    return make


@pytest.fixture
def script_coins():
    """script_coins(net, bits, players=None): fixed coin flips, every other draw stays seeded"""

    def script(net: Network, bits, players=None):
        for p in players if players is not None else range(net.n):
            stream = net.party(p).stream
            net.set_stream(p, ScriptedStream(coins=list(bits), seed=stream.seed))

    return script


def _collect(payload, found):
    if isinstance(payload, tuple):
        for item in payload:
            _collect(item, found)
    elif isinstance(payload, FieldElement):
        found.setdefault(payload.spec.modulus, []).append(payload.value)


@pytest.fixture
def view_values():
    """view_values(transcript, players, pooled=None): every field element the players received, by modulus"""

    def collect(transcript, players, pooled=None):
        pooled = {} if pooled is None else pooled
        for m in view_of(transcript, players).messages:
            _collect(m.payload, pooled)
        return pooled

    return collect


@pytest.fixture
def assert_same_distribution():
    """Chi-square homogeneity of two pooled views, one test per modulus"""

    def check(first, second, alpha=0.001):
        assert set(first) == set(second)
        for modulus in first:
            rows = [[values.count(v) for v in range(modulus)] for values in (first[modulus], second[modulus])]
            columns = [column for column in zip(*rows) if sum(column)]
            if len(columns) < 2:
                continue
            assert stats.chi2_contingency(list(zip(*columns))).pvalue > alpha, modulus

    return check
