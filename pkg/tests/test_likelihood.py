import numpy as np
import pytest

from panelmendel.engine.errors import ImpossibilityError, InputError
from panelmendel.engine.fixtures import F, M, handcrafted, person
from panelmendel.engine.genotype import enumerate_pared
from panelmendel.engine.likelihood import (ModifiedCurveCache, apply_hazard_ratio, apply_relative_risk,
                                           cancer_likelihood, evidence_multiplier, person_likelihood,
                                           person_modifier, secondary_cancer_likelihood)
from panelmendel.engine.model import DiagnosticLog, EngineOptions, GermlineResult, MultiCarrierRule
from panelmendel.engine.params import PenetranceCurve, parse_parameter_db
from panelmendel.engine.pedigree import GermlineTest
from tests.conftest import constant, small_doc

IMPERFECT = EngineOptions(germline_sensitivity=0.95, germline_specificity=0.98)


def _two_gene_db():
    doc = small_doc(carrier=0.01)
    doc["genes"].append({"id": "G2", "states": 2, "alleleFrequency": {"All": 0.01}})
    doc["carrierPenetrance"] += [{"gene": "G2", "state": 1, "cancer": "c1", "sex": sex, "values": constant(0.01)}
                                 for sex in ("female", "male")]
    return parse_parameter_db(doc)


def _secondary_db():
    doc = small_doc()
    doc["secondaryCancers"] = [{
        "primary": "c1", "secondary": "c1_second",
        "noncarrier": {"female": [0.001 * (i + 1) for i in range(20)]},
        "carrier": [{"gene": "G1", "state": 1, "sex": "female", "values": [0.002 * (i + 1) for i in range(20)]}],
    }]
    return parse_parameter_db(doc)


def _marker_db():
    doc = small_doc()
    doc["markers"] = {"m": {"cancer": "c1", "classes": [{"genes": ["G1"], "sensitivity": 0.9}], "specificity": 0.8}}
    return parse_parameter_db(doc)


def _with_germline(someone, *tests):
    return someone._replace(germline=tuple(GermlineTest(gene_id, result) for gene_id, result in tests))


def test_unaffected_term(small_db) -> None:
    """
    Carrier penetrance 0.02 per year leaves survival 0.7 at age 15
    """
    assert cancer_likelihood(person("p", F, 15), "c1", (1,), small_db) == pytest.approx(0.7)


def test_affected_term(small_db) -> None:
    assert cancer_likelihood(person("p", F, 15, cancers=[("c1", 5)]), "c1", (1,), small_db) == pytest.approx(0.02)


def test_double_carrier() -> None:
    db = _two_gene_db()
    someone = person("p", M, 10)
    assert cancer_likelihood(someone, "c1", (1, 1), db) == pytest.approx(0.81)
    assert cancer_likelihood(someone, "c1", (1, 1), db,
                             EngineOptions(multi_carrier_rule=MultiCarrierRule.MAX)) == pytest.approx(0.9)


def test_secondary_cancer() -> None:
    """
    Secondary curves are indexed by years since the primary diagnosis
    """
    db = _secondary_db()
    affected = person("p", F, 18, cancers=[("c1", 10), ("c1_second", 15)])
    assert secondary_cancer_likelihood(affected, "c1", "c1_second", (0,), db) == pytest.approx(0.006)
    assert secondary_cancer_likelihood(affected, "c1", "c1_second", (1,), db) == pytest.approx(0.012)
    unaffected = person("p", F, 18, cancers=[("c1", 10)])
    assert secondary_cancer_likelihood(unaffected, "c1", "c1_second", (0,), db) == pytest.approx(0.955)
    assert secondary_cancer_likelihood(person("p", F, 18), "c1", "c1_second", (1,), db) == 1.0


def test_secondary_before_primary() -> None:
    someone = person("p", F, 18, cancers=[("c1", 10), ("c1_second", 8)])
    with pytest.raises(InputError):
        secondary_cancer_likelihood(someone, "c1", "c1_second", (0,), _secondary_db())


def test_relative_risk() -> None:
    curve = apply_relative_risk(PenetranceCurve(constant(0.02)), 0.5, 10)
    np.testing.assert_allclose(curve.values[:9], 0.02)
    np.testing.assert_allclose(curve.values[9:], 0.01)


def test_hazard_ratio() -> None:
    """
    Hazard 0.01 doubled from age 3 on
    """
    curve = apply_hazard_ratio(PenetranceCurve.from_hazards(constant(0.01)), 2.0, 3)
    assert curve.at(2) == pytest.approx(0.99 * 0.01)
    assert curve.at(3) == pytest.approx(0.99 ** 2 * 0.02)
    assert curve.at(4) == pytest.approx(0.99 ** 2 * 0.98 * 0.02)


def test_neutral_effects() -> None:
    curve = PenetranceCurve(constant(0.02))
    assert apply_relative_risk(curve, 1.0, 5) is curve
    assert apply_hazard_ratio(curve, 1.0, 5) is curve


def test_relative_risk_clamped() -> None:
    warnings = DiagnosticLog()
    curve = apply_relative_risk(PenetranceCurve(constant(0.1)), 3.0, 1, warnings)
    assert curve.total() == pytest.approx(1.0)
    assert curve.at(5) == 0.0
    assert any("clamped" in message for message in warnings)


def test_hazard_ratio_clamped() -> None:
    warnings = DiagnosticLog()
    curve = apply_hazard_ratio(PenetranceCurve.from_hazards(constant(0.6, 5)), 2.0, 2, warnings)
    assert curve.total() == pytest.approx(1.0)
    assert any("clamped" in message for message in warnings)


def test_marker_evidence() -> None:
    db = _marker_db()
    positive = person("p", F, 15, markers=[("m", True)])
    negative = person("p", F, 15, markers=[("m", False)])
    assert evidence_multiplier(positive, (1,), db) == pytest.approx(0.9)
    assert evidence_multiplier(positive, (0,), db) == pytest.approx(0.2)
    assert evidence_multiplier(negative, (1,), db) == pytest.approx(0.1)
    assert evidence_multiplier(negative, (0,), db) == pytest.approx(0.8)
    assert evidence_multiplier(positive, (1,), db, EngineOptions(use_modifiers=False)) == 1.0


def test_germline_evidence(small_db) -> None:
    carrier = _with_germline(person("p", F, 15), ("G1", GermlineResult.CARRIER))
    assert evidence_multiplier(carrier, (1,), small_db) == 1.0
    assert evidence_multiplier(carrier, (0,), small_db) == 0.0
    assert evidence_multiplier(carrier, (0,), small_db, IMPERFECT) == pytest.approx(0.02)
    noncarrier = _with_germline(person("p", F, 15), ("G1", GermlineResult.NONCARRIER))
    assert evidence_multiplier(noncarrier, (1,), small_db, IMPERFECT) == pytest.approx(0.05)
    # germline results are not switched off with the modifiers
    assert evidence_multiplier(carrier, (0,), small_db, EngineOptions(use_modifiers=False)) == 0.0


def test_person_vector_matches_scalar(db) -> None:
    """
    The vectorized likelihood equals the product of the per-genotype terms
    """
    space = enumerate_pared(db.genes, 2)
    options = EngineOptions()
    for pedigree in handcrafted():
        for member in pedigree.members:
            vector = person_likelihood(member, space, db, options)
            for index, genotype in enumerate(space.states):
                expected = evidence_multiplier(member, genotype, db, options)
                for cancer_id in db.cancers:
                    expected *= cancer_likelihood(member, cancer_id, genotype, db, options)
                expected *= secondary_cancer_likelihood(member, "breast", "contralateral_breast", genotype, db,
                                                        options)
                assert vector[index] == pytest.approx(expected, rel=1e-12), (pedigree.family_id, member.person_id)


def test_person_vector_max_rule(db) -> None:
    space = enumerate_pared(db.genes, 2)
    options = EngineOptions(multi_carrier_rule=MultiCarrierRule.MAX)
    someone = person("p", F, 60, cancers=[("breast", 45)])
    vector = person_likelihood(someone, space, db, options)
    for index, genotype in enumerate(space.states):
        expected = cancer_likelihood(someone, "breast", genotype, db, options) * \
            cancer_likelihood(someone, "colorectal", genotype, db, options) * \
            secondary_cancer_likelihood(someone, "breast", "contralateral_breast", genotype, db, options)
        assert vector[index] == pytest.approx(expected, rel=1e-12)


def test_impossible_evidence(small_db) -> None:
    someone = _with_germline(person("p", F, 15), ("G1", GermlineResult.CARRIER), ("G1", GermlineResult.NONCARRIER))
    with pytest.raises(ImpossibilityError):
        person_likelihood(someone, enumerate_pared(small_db.genes, 1), small_db)


def test_unknown_cancer(small_db) -> None:
    with pytest.raises(InputError):
        person_likelihood(person("p", F, 15, cancers=[("c9", 3)]), enumerate_pared(small_db.genes, 1), small_db)


def test_earliest_intervention_wins(db) -> None:
    warnings = DiagnosticLog()
    someone = person("p", F, 50, interventions=[("oophorectomy", 40), ("mastectomy", 35)])
    modifier = person_modifier(someone, "breast", db, EngineOptions(), warnings)
    assert modifier.effect.intervention_id == "mastectomy"
    assert modifier.age == 35
    assert len(warnings) == 1
    assert person_modifier(someone, "breast", db, EngineOptions(use_modifiers=False)) is None
    assert person_modifier(someone, "colorectal", db, EngineOptions()) is None


def test_intervention_lowers_risk(db) -> None:
    untreated = person("p", F, 60)
    treated = person("p", F, 60, interventions=[("mastectomy", 30)])
    carrier = (1, 0, 0)
    assert cancer_likelihood(treated, "breast", carrier, db) > cancer_likelihood(untreated, "breast", carrier, db)
    assert cancer_likelihood(treated, "breast", carrier, db, EngineOptions(use_modifiers=False)) == \
        cancer_likelihood(untreated, "breast", carrier, db)


def test_modified_curve_cache() -> None:
    cache = ModifiedCurveCache()
    calls = []

    def compute(log):
        calls.append(1)
        log.warn("computed")
        return PenetranceCurve(constant(0.01))

    first = cache.get("key", compute)
    warnings = DiagnosticLog()
    second = cache.get("key", compute, warnings)
    assert first is second
    assert len(calls) == 1 and len(cache) == 1
    assert list(warnings) == ["computed"]
