import os
from typing import Any, Dict, List, Optional

import pytest

from panelmendel.engine.genotype import enumerate_pared
from panelmendel.engine.params import load_parameter_db, parse_parameter_db

PARAMS_PATH = os.path.join(os.path.dirname(__file__), "..", "panelmendel", "data", "synthetic_params.json")


def constant(value: float, max_age: int = 20) -> List[float]:
    return [value] * max_age


def small_doc(frequency: float = 0.01, carrier: float = 0.02, population: float = 0.015, max_age: int = 20,
              states: int = 2, death: Optional[float] = 0.0) -> Dict[str, Any]:
    """One gene, one cancer, constant yearly curves."""
    doc = {
        "maxAge": max_age,
        "genes": [{"id": "G1", "states": states, "alleleFrequency": {"All": frequency}}],
        "cancers": ["c1"],
        "carrierPenetrance": [{"gene": "G1", "state": state, "cancer": "c1", "sex": sex, "values":
                               constant(carrier, max_age)}
                              for state in range(1, states) for sex in ("female", "male")],
        "populationRate": [{"cancer": "c1", "sex": sex, "values": constant(population, max_age)}
                           for sex in ("female", "male")],
        "deathOtherCauses": {sex: constant(death, max_age) for sex in ("female", "male")},
    }
    return doc


@pytest.fixture(scope="session")
def db():
    return load_parameter_db(PARAMS_PATH)


@pytest.fixture(scope="session")
def space(db):
    return enumerate_pared(db.genes, 2)


@pytest.fixture
def small_db():
    return parse_parameter_db(small_doc())
