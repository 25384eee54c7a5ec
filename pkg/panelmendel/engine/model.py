import logging
from enum import Enum
from typing import List, NamedTuple, Optional


class Sex(Enum):
    FEMALE = "female"
    MALE = "male"


class GermlineResult(Enum):
    CARRIER = "carrier"
    NONCARRIER = "noncarrier"


class EffectKind(Enum):
    RELATIVE_RISK = "relative-risk"
    HAZARD_RATIO = "hazard-ratio"


class RiskKind(Enum):
    NET = "net"
    CRUDE = "crude"


class MultiCarrierRule(Enum):
    PRODUCT = "product"
    MAX = "max"


class EngineOptions(NamedTuple):
    """Model-level switches shared by likelihood, peeling and posterior."""
    max_carriers: int = 2
    use_modifiers: bool = True
    multi_carrier_rule: MultiCarrierRule = MultiCarrierRule.PRODUCT
    germline_sensitivity: float = 1.0
    germline_specificity: float = 1.0
    space_cap: int = 10 ** 6
    transmission_cap: int = 16 * 10 ** 6
    brute_force_cap: int = 10 ** 8


class DiagnosticLog(list):
    """Collects warnings for a report and forwards them to a logger."""

    def __init__(self, logger: Optional[logging.Logger] = None) -> None:
        super().__init__()
        self._logger = logger or logging.getLogger("panelmendel")

    def warn(self, message: str) -> None:
        self._logger.warning(message)
        self.append(message)

    def extend_from(self, messages: List[str]) -> None:
        for message in messages:
            if message not in self:
                self.append(message)
