from typing import Optional

from flask import Flask, current_app, g

from panelmendel.engine.genotype import ParedGenotypeSpace, enumerate_pared
from panelmendel.engine.model import EngineOptions, MultiCarrierRule
from panelmendel.engine.params import ParameterDB, load_parameter_db


def get_params(path: Optional[str] = None, max_carriers: Optional[int] = None) -> ParameterDB:
    """Load the configured parameter database. The database is unique for
    each application context and will be reused if this is called again
    with the same arguments.
    """
    config = current_app.config
    path = path or config["PARAMS_PATH"]
    max_carriers = config["MAX_CARRIERS"] if max_carriers is None else max_carriers
    key = (path, max_carriers)
    if g.get("params_key") != key:
        current_app.logger.debug(f"Loading parameter database {path}")
        g.params = load_parameter_db(path, max_carriers=max_carriers, clamp_tolerance=config["CLAMP_TOLERANCE"],
                                     space_cap=config["SPACE_CAP"], default_max_age=config["MAX_AGE"])
        g.params_key = key
        g.pop("space", None)
    return g.params


def get_space(db: ParameterDB, max_carriers: int) -> ParedGenotypeSpace:
    """Pared genotype space of `db`, cached next to the database."""
    space = g.get("space")
    if space is None or space.genes != db.genes or space.max_carriers != min(max_carriers, len(db.genes)):
        space = enumerate_pared(db.genes, max_carriers, cap=current_app.config["SPACE_CAP"])
        g.space = space
    return space


def engine_options(**overrides) -> EngineOptions:
    config = current_app.config
    options = EngineOptions(max_carriers=config["MAX_CARRIERS"],
                            use_modifiers=config["USE_MODIFIERS"],
                            multi_carrier_rule=MultiCarrierRule(config["MULTI_CARRIER_RULE"]),
                            germline_sensitivity=config["GERMLINE_SENSITIVITY"],
                            germline_specificity=config["GERMLINE_SPECIFICITY"],
                            space_cap=config["SPACE_CAP"],
                            transmission_cap=int(config["TRANSMISSION_CAP"]),
                            brute_force_cap=config["BRUTE_FORCE_CAP"])
    return options._replace(**{key: value for key, value in overrides.items() if value is not None})


def close_params(e=None):
    """Drop the database and genotype space cached by this context."""
    for name in ("params", "params_key", "space"):
        g.pop(name, None)


def init_app(app: Flask) -> None:
    """Register parameter database functions with the Flask app. This is
    called by the application factory.
    """
    app.teardown_appcontext(close_params)
