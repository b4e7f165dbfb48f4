"""
Protocol toolkit configuration from the environment
"""
import logging
import os

from dotenv import load_dotenv

from src.errors import ConfigError

# Load environment variables
load_dotenv()

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _positive_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value}")
    return value


class ProtocolConfig:
    def __init__(self):
        self.trial_workers = _positive_int("Q2MPC_TRIAL_WORKERS", 1)
        self.default_k = _positive_int("Q2MPC_DEFAULT_K", 8)
        self.log_level = os.getenv("Q2MPC_LOG_LEVEL", "WARNING").upper()
        if not isinstance(logging.getLevelName(self.log_level), int):
            raise ConfigError(f"Q2MPC_LOG_LEVEL is not a log level: {self.log_level!r}")

    def setup_logging(self):
        """Configure the root logger for the command line"""
        logging.basicConfig(level=self.log_level, format=LOG_FORMAT)

    def describe(self) -> dict:
        return {
            "trial_workers": self.trial_workers,
            "default_k": self.default_k,
            "log_level": self.log_level,
        }


def load_protocol_config() -> ProtocolConfig:
    """Fresh settings, re-reading the environment"""
    return ProtocolConfig()

