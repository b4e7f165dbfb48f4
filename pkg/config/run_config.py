"""
Validated options of one `run` invocation
"""
from typing import Dict, FrozenSet, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.errors import UnknownStrategy
from src.simnet.adversary import AdversaryScript, parse_strategy

MAX_SEED = 2 ** 64 - 1


class AdversarySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    strategy: str = "honest"
    corrupt: FrozenSet[int] = frozenset()
    rushing: bool = True

    @field_validator("strategy")
    @classmethod
    def _known_strategy(cls, value: str) -> str:
        try:
            parse_strategy(value)
        except UnknownStrategy as e:
            raise ValueError(str(e)) from e
        return value

    @field_validator("corrupt", mode="before")
    @classmethod
    def _parse_corrupt(cls, value):
        if isinstance(value, str):
            items = [item.strip() for item in value.split(",") if item.strip()]
            try:
                return frozenset(int(item) for item in items)
            except ValueError:
                raise ValueError(f"corrupt set must be a comma list of player indices, got {value!r}") from None
        return value

    @field_validator("corrupt")
    @classmethod
    def _non_negative(cls, value: FrozenSet[int]) -> FrozenSet[int]:
        if any(p < 0 for p in value):
            raise ValueError("player indices are non-negative")
        return value

    def script(self) -> AdversaryScript:
        """A fresh script; strategies keep per-run state"""
        return AdversaryScript(self.corrupt, parse_strategy(self.strategy), self.rushing)


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    circuit: str
    msp: str
    structure: Optional[str] = None
    inputs: Dict[str, int] = Field(default_factory=dict)
    adversary: AdversarySpec = Field(default_factory=AdversarySpec)
    overpowered: bool = False
    k: int = Field(8, ge=1)
    seed: int = Field(0, ge=0, le=MAX_SEED)
    trials: int = Field(1, ge=1)
    workers: int = Field(1, ge=1)
    report: Optional[str] = None

    @field_validator("inputs", mode="before")
    @classmethod
    def _parse_inputs(cls, value):
        if not isinstance(value, str):
            return value
        parsed = {}
        for item in filter(None, (p.strip() for p in value.split(","))):
            key, sep, raw = item.partition("=")
            if not sep or not key.strip():
                raise ValueError(f"inputs are name=value pairs, got {item!r}")
            try:
                parsed[key.strip()] = int(raw)
            except ValueError:
                raise ValueError(f"input {key.strip()!r} is not an integer: {raw!r}") from None
        return parsed
