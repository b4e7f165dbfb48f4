# simnet package: round-synchronous simulator and scripted adversaries
from src.simnet.adversary import STRATEGIES, AdversaryScript, Strategy, build_strategy, parse_strategy
from src.simnet.network import (
    Delivery,
    Message,
    Network,
    Party,
    Transcript,
    View,
    coin_flip,
    run_protocol,
    view_of,
)
from src.simnet.randomness import RandomStream, ScriptedStream

__all__ = [
    "STRATEGIES",
    "AdversaryScript",
    "Delivery",
    "Message",
    "Network",
    "Party",
    "RandomStream",
    "ScriptedStream",
    "Strategy",
    "Transcript",
    "View",
    "build_strategy",
    "coin_flip",
    "parse_strategy",
    "run_protocol",
    "view_of",
]
