"""Options and exit-code handling shared by the command blueprints."""

import functools
from typing import Callable, Iterable, List, Optional

import click
from flask import current_app

from panelmendel.engine.errors import InputError, InvariantError, ModelError
from panelmendel.engine.model import RiskKind

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVARIANT = 2


class ExitStatus:
    """Worst outcome seen while processing a batch of families."""

    def __init__(self) -> None:
        self.code = EXIT_OK
        self.failed: List[str] = []

    def record(self, family_id: str, error: Exception) -> None:
        self.failed.append(family_id)
        code = getattr(error, "exit_code", EXIT_INVARIANT)
        self.code = max(self.code, code)
        if code == EXIT_INVARIANT:
            current_app.logger.error(f"{family_id}: internal error {type(error).__name__}: {error}")
        else:
            current_app.logger.warning(f"{family_id}: {type(error).__name__}: {error}")


def handle_errors(function: Callable) -> Callable:
    """Turn engine exceptions into exit codes 1 (model/input) and 2 (invariant)."""

    @functools.wraps(function)
    def wrapper(*args, **kwargs):
        context = click.get_current_context()
        try:
            code = function(*args, **kwargs)
        except ModelError as e:
            current_app.logger.error(f"{type(e).__name__}: {e}")
            context.exit(EXIT_INPUT)
        except InvariantError as e:
            current_app.logger.error(f"Invariant breach: {e}")
            context.exit(EXIT_INVARIANT)
        if code:
            context.exit(code)
    return wrapper


def params_option(function: Callable) -> Callable:
    return click.option("--params", "params_path", type=click.Path(dir_okay=False), default=None,
                        help="Parameter database (JSON), defaults to PARAMS_PATH.")(function)


def max_carriers_option(function: Callable) -> Callable:
    return click.option("-M", "--max-carriers", "max_carriers", type=int, default=None,
                        help="Maximum number of carried genes per person.")(function)


def modifiers_option(function: Callable) -> Callable:
    return click.option("--modifiers/--no-modifiers", "use_modifiers", default=None,
                        help="Use interventions and tumor markers.")(function)


def ancestry_option(function: Callable) -> Callable:
    return click.option("--ancestry", type=str, default=None,
                        help="Ancestry group for allele frequencies and population rates.")(function)


def seed_option(function: Callable) -> Callable:
    return click.option("--seed", type=int, default=0, show_default=True, help="Random seed.")(function)


def check_max_carriers(max_carriers: Optional[int]) -> int:
    value = current_app.config["MAX_CARRIERS"] if max_carriers is None else max_carriers
    if value < 0:
        raise InputError(f"-M must be >= 0, got {value}")
    return value


def check_horizons(horizons: Iterable[int]) -> List[int]:
    values = list(horizons) or list(current_app.config["RISK_HORIZONS"])
    negative = [value for value in values if value < 0]
    if negative:
        raise InputError(f"--t0 values must be >= 0, got {negative}")
    return values


def risk_kind(value: Optional[str]) -> RiskKind:
    return RiskKind(value or current_app.config["RISK_KIND"])
