"""
Scripted adversaries.

Honest protocol code passes every value a party could cheat on through
`party.deviate(hook, value, **context)`; a strategy rewrites the values
of the hooks it cares about and leaves the rest alone.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, Optional, Tuple, Type

from src.errors import UnknownStrategy

logger = logging.getLogger(__name__)

STRATEGIES: Dict[str, Type["Strategy"]] = {}


def register(name: str) -> Callable[[Type["Strategy"]], Type["Strategy"]]:
    def wrap(cls):
        cls.name = name
        STRATEGIES[name] = cls
        return cls
    return wrap


class Strategy:
    """Base strategy: behave honestly"""

    name = "base"
    # parameter name -> converter used when parsing "name:key=value"
    params: Dict[str, Callable[[str], Any]] = {}
    # the opened values of the inputs stay those of the plain evaluation
    preserves_inputs = True

    def __init__(self, **kwargs):
        unknown = set(kwargs) - set(self.params)
        if unknown:
            raise UnknownStrategy(f"{self.name} has no parameter(s) {sorted(unknown)}")
        self.options = kwargs
        self.stream = None
        self._guesses: Dict[Any, int] = {}

    def bind(self, stream):
        """Attach the adversary's own random stream"""
        self.stream = stream

    def guess(self, key) -> int:
        """One coin guess per challenge, fixed the first time it is asked for"""
        if key not in self._guesses:
            self._guesses[key] = self.stream.coin() if self.stream is not None else 0
        return self._guesses[key]

    def deviate(self, party, hook: str, value, context: Dict[str, Any]):
        return value

    def refuses(self, party, hook: str, context: Dict[str, Any]) -> bool:
        return False

    def describe(self) -> str:
        if not self.options:
            return self.name
        return self.name + ":" + ",".join(f"{k}={v}" for k, v in sorted(self.options.items()))


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@register("honest")
class Honest(Strategy):
    pass


@register("inconsistent_wss_dealer")
class InconsistentWssDealer(Strategy):
    """Deals WSS shares with one row off by `delta`"""

    params = {"row": int, "delta": int, "once": _bool}

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.row = kwargs.get("row")
        self.delta = kwargs.get("delta", 1)
        self.once = kwargs.get("once", False)
        self._dealt = 0

    def deviate(self, party, hook, value, context):
        if hook != "wss.shares":
            return value
        self._dealt += 1
        if self.once and self._dealt > 1:
            return value
        row = self.row if self.row is not None else len(value) - 1
        shares = list(value)
        shares[row] = shares[row] + self.delta
        logger.debug(f"P{party.index} perturbs WSS row {row} of {context.get('wid')}")
        return tuple(shares)


@register("inconsistent_vss_dealer")
class InconsistentVssDealer(Strategy):
    """
    Deals top-level VSS shares with one row off by `delta`. With `guess`,
    every blinding sharing is prepared for a guessed challenge and the
    dealer's own coins are set to the guesses.
    """

    params = {"row": int, "delta": int, "guess": _bool}

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.row = kwargs.get("row")
        self.delta = kwargs.get("delta", 1)
        self.use_guess = kwargs.get("guess", True)

    def _row(self, shares) -> int:
        return self.row if self.row is not None else len(shares) - 1

    def deviate(self, party, hook, value, context):
        if hook == "vss.shares":
            shares = list(value)
            shares[self._row(shares)] = shares[self._row(shares)] + self.delta
            return tuple(shares)
        if not self.use_guess:
            return value
        if hook == "vss.blinding":
            # tails opens alpha + gamma, so pre-compensate the perturbed row
            if self.guess(("vss", context["vid"], context["round"])) == 0:
                shares = list(value)
                shares[self._row(shares)] = shares[self._row(shares)] - self.delta
                return tuple(shares)
            return value
        if hook == "coin" and context.get("purpose", ("",))[0] == "vss":
            return self.guess(context["purpose"])
        return value


@register("forging_intermediary")
class ForgingIntermediary(Strategy):
    """Claims s + delta in GIC-Authenticate, shifting each key by a guessed b"""

    params = {"delta": int, "guess": _bool}

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.delta = kwargs.get("delta", 1)
        self.use_guess = kwargs.get("guess", True)

    def deviate(self, party, hook, value, context):
        if hook != "gic.auth.claim":
            return value
        claimed, keys = value
        forged = claimed + self.delta
        if not self.use_guess or self.stream is None:
            return forged, keys
        spec = forged.spec
        shifted = []
        for index, y in keys:
            # c = s + b*y = (s + delta) + b*(y - delta/b)
            b_guess = self.stream.nonzero(spec)
            shifted.append((index, y - spec(self.delta) / b_guess))
        return forged, tuple(shifted)


@register("wrong_product_dealer")
class WrongProductDealer(Strategy):
    """
    Commits omega_l = mu_l * nu_l + delta in MULT and, with `guess`,
    prepares every product-proof round for a guessed coin.
    """

    params = {"row": int, "delta": int, "guess": _bool}

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.row = kwargs.get("row")
        self.delta = kwargs.get("delta", 1)
        self.use_guess = kwargs.get("guess", True)
        self._cheating_claims = set()

    def deviate(self, party, hook, value, context):
        if hook == "mult.product":
            if self.row is None or context["row"] == self.row:
                self._cheating_claims.add(context.get("claim"))
                return value + self.delta
            return value
        if hook == "cp.c_prime":
            if self.use_guess and context["claim"] in self._cheating_claims:
                # tails checks (b+b')a - c' - c, which absorbs -delta in c'
                if self.guess(("cp", context["claim"], context["round"])) == 0:
                    return value - self.delta
            return value
        if hook == "coin" and self.use_guess and context.get("purpose", ("",))[0] == "cp":
            if context["purpose"][1] in self._cheating_claims:
                return self.guess(context["purpose"])
        return value


@register("echo_accuser")
class EchoAccuser(Strategy):
    """
    Accuses a WSS dealer exactly when another accusation of the same round
    reached it first. Only a rushing adversary sees those in time.
    """

    def deviate(self, party, hook, value, context):
        if hook != "wss.accuse":
            return value
        seen = any(
            m.kind == "wss.accuse" and isinstance(m.payload, tuple) and m.payload[:1] == (context["wid"],)
            for m in party.rushed
        )
        if seen:
            logger.debug(f"P{party.index} joins the accusation against {context['wid']}")
        return seen


@register("refuse_conversion")
class RefuseConversion(Strategy):
    """Refuses to convert its WSS commitments to VSS"""

    def refuses(self, party, hook, context):
        return hook == "convert"


@register("lying_opener")
class LyingOpener(Strategy):
    """Broadcasts a_* for a + delta when opening its own WSS"""

    params = {"delta": int}
    preserves_inputs = False

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.delta = kwargs.get("delta", 1)

    def deviate(self, party, hook, value, context):
        if hook != "wss.open.a_star":
            return value
        coords = list(value)
        coords[0] = coords[0] + self.delta
        return tuple(coords)


def build_strategy(name: str, params: Optional[Dict[str, Any]] = None) -> Strategy:
    if name not in STRATEGIES:
        raise UnknownStrategy(f"unknown strategy {name!r}; known: {', '.join(sorted(STRATEGIES))}")
    return STRATEGIES[name](**(params or {}))


def parse_strategy(text: str) -> Strategy:
    """`name` or `name:key=value,...`"""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name not in STRATEGIES:
        raise UnknownStrategy(f"unknown strategy {name!r}; known: {', '.join(sorted(STRATEGIES))}")
    converters = STRATEGIES[name].params
    params: Dict[str, Any] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, raw = item.partition("=")
        if not sep or key not in converters:
            raise UnknownStrategy(f"bad parameter {item!r} for {name}")
        try:
            params[key] = converters[key](raw)
        except ValueError as e:
            raise UnknownStrategy(f"bad value for {name}.{key}: {e}") from e
    return STRATEGIES[name](**params)


@dataclass
class AdversaryScript:
    corrupt: FrozenSet[int] = frozenset()
    strategy: Strategy = field(default_factory=Honest)
    rushing: bool = True

    def __post_init__(self):
        self.corrupt = frozenset(self.corrupt)

    @classmethod
    def honest(cls) -> "AdversaryScript":
        return cls(frozenset(), Honest(), True)

    @classmethod
    def of(cls, corrupt: Iterable[int], strategy: str = "honest", rushing: bool = True,
           **params) -> "AdversaryScript":
        return cls(frozenset(corrupt), build_strategy(strategy, params), rushing)

    def describe(self) -> str:
        return (f"{self.strategy.describe()} corrupt={sorted(self.corrupt)} "
                f"rushing={'on' if self.rushing else 'off'}")
