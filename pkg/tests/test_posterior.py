import math
import time

import numpy as np
import pytest

from panelmendel.engine.errors import InputError
from panelmendel.engine.fixtures import F, M, handcrafted, person
from panelmendel.engine.genotype import enumerate_pared, founder_prior
from panelmendel.engine.model import DiagnosticLog, EngineOptions, GermlineResult, RiskKind
from panelmendel.engine.params import parse_parameter_db, synthetic_db
from panelmendel.engine.pedigree import GermlineTest, InterventionEntry, Pedigree
from panelmendel.engine.peeling import brute_force_conditional, pedigree_likelihoods
from panelmendel.engine.posterior import (ANY_GROUP, FutureRisk, future_risk, future_risk_crude, future_risk_net,
                                          posterior, reported_risk)
from panelmendel.engine.simulator import TEMPLATES, FamilyTemplate, simulate_family
from tests.conftest import small_doc


def _uniform_db(death: float = 0.0):
    """No carriers, penetrance 0.01 at every age."""
    return parse_parameter_db(small_doc(frequency=0.0, carrier=0.01, population=0.01, death=death))


def _solo(age: int, **kwargs) -> Pedigree:
    return Pedigree((person("counselee", F, age, **kwargs),), "counselee", "solo")


@pytest.mark.parametrize("index", range(7))
def test_posterior_normalized(db, space, index) -> None:
    report = posterior(handcrafted()[index], space, db)
    assert report.genotype_posterior.sum() == pytest.approx(1.0, abs=1e-12)
    assert (report.genotype_posterior >= 0).all()
    for gene_id, probability in report.per_gene.items():
        assert 0.0 <= probability <= report.groups[ANY_GROUP] + 1e-12
    assert report.groups["BRCA"] >= max(report.per_gene["BRCA1"], report.per_gene["BRCA2"]) - 1e-12
    assert math.isfinite(report.log_likelihood)


def test_affected_relatives_raise_carrier_probability(db, space) -> None:
    solo = posterior(handcrafted()[0], space, db)
    family = posterior(handcrafted()[2], space, db)
    assert family.groups["BRCA"] > 2 * solo.groups["BRCA"]
    assert family.per_gene["MLH1"] > solo.per_gene["MLH1"]


def test_definitive_germline(db, space) -> None:
    pedigree = _solo(40)
    counselee = pedigree.counselee._replace(germline=(GermlineTest("BRCA2", GermlineResult.CARRIER),
                                                      GermlineTest("MLH1", GermlineResult.NONCARRIER)))
    report = posterior(pedigree._replace(members=(counselee,)), space, db)
    assert report.per_gene["BRCA2"] == pytest.approx(1.0)
    assert report.per_gene["MLH1"] == 0.0
    assert report.groups["BRCA"] == pytest.approx(1.0)


def test_modifiers_without_evidence(db, space) -> None:
    """
    Switching modifiers off changes nothing for a family without markers or interventions
    """
    trio = handcrafted()[1]
    on = posterior(trio, space, db, EngineOptions(use_modifiers=True))
    off = posterior(trio, space, db, EngineOptions(use_modifiers=False))
    np.testing.assert_array_equal(on.genotype_posterior, off.genotype_posterior)
    assert on.future_risk == off.future_risk


def test_modifiers_change_marker_family(db, space) -> None:
    family = handcrafted()[4]
    on = posterior(family, space, db, EngineOptions(use_modifiers=True))
    off = posterior(family, space, db, EngineOptions(use_modifiers=False))
    assert on.per_gene["MLH1"] > off.per_gene["MLH1"]


def test_log_likelihood_matches_brute_force(db, space) -> None:
    trio = handcrafted()[1]
    report = posterior(trio, space, db)
    brute = brute_force_conditional(trio, space, db)
    weights = founder_prior(space, "All") * brute.conditional * math.exp(brute.log_scale)
    assert report.log_likelihood == pytest.approx(math.log(weights.sum()), rel=1e-10)
    np.testing.assert_allclose(report.genotype_posterior, weights / weights.sum(), rtol=1e-10, atol=1e-15)


def test_uninformative_child_gets_founder_prior() -> None:
    """
    A child whose family carries no information has the Hardy-Weinberg prior, not the
    prior squared
    """
    db = synthetic_db(3, allele_frequency=0.2)
    space = enumerate_pared(db.genes, 1)
    trio = Pedigree((person("mother", F, 50), person("father", M, 50),
                     person("counselee", F, 20, "mother", "father")), "counselee", "trio")
    ones = {member.person_id: np.ones(space.size) for member in trio.members}
    report = posterior(trio, space, db, horizons=(), likelihoods=ones)
    prior = founder_prior(space, "All")
    np.testing.assert_allclose(report.genotype_posterior, prior / prior.sum(), rtol=0, atol=1e-12)
    founder = trio.counselee._replace(mother_id=None, father_id=None)
    solo = posterior(Pedigree((founder,), "counselee", "solo"), space, db, horizons=(),
                     likelihoods={"counselee": np.ones(space.size)})
    np.testing.assert_allclose(report.genotype_posterior, solo.genotype_posterior, rtol=0, atol=1e-12)


@pytest.mark.parametrize("index", [1, 2, 4])
def test_posterior_invariant_to_likelihood_scale(db, space, index) -> None:
    """
    Multiplying a relative's likelihood vector by a constant leaves the posterior unchanged
    """
    family = handcrafted()[index]
    likelihoods = pedigree_likelihoods(family, space, db)
    reference = posterior(family, space, db, horizons=(), likelihoods=likelihoods)
    relative = next(member.person_id for member in family.members if member.person_id != family.counselee_id)
    scaled = dict(likelihoods, **{relative: likelihoods[relative] * 1e-30})
    report = posterior(family, space, db, horizons=(), likelihoods=scaled)
    np.testing.assert_allclose(report.genotype_posterior, reference.genotype_posterior, rtol=0, atol=1e-12)
    assert report.log_likelihood == pytest.approx(reference.log_likelihood + math.log(1e-30), rel=1e-10)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_paring_consistency(seed) -> None:
    """
    With rare variants the M = 1 posterior matches the full posterior restricted to
    at most one carried gene
    """
    db = synthetic_db(3, allele_frequency=0.001)
    family = simulate_family(TEMPLATES["standard"], db, seed=seed)
    pared = posterior(family.pedigree, enumerate_pared(db.genes, 1), db, horizons=())
    full_space = enumerate_pared(db.genes, 3)
    full = posterior(family.pedigree, full_space, db, horizons=())
    full_index = {tuple(int(s) for s in states): i for i, states in enumerate(full_space.states)}
    restricted = np.array([full.genotype_posterior[full_index[tuple(int(s) for s in states)]]
                           for states in pared.genotypes])
    np.testing.assert_allclose(pared.genotype_posterior, restricted / restricted.sum(), rtol=2e-2, atol=1e-8)


def test_uniform_future_risk() -> None:
    """
    Penetrance 0.01 per year, current age 10: five-year risk 0.05 / 0.9
    """
    db = _uniform_db()
    pedigree = _solo(10)
    report = posterior(pedigree, enumerate_pared(db.genes, 1), db, horizons=(5,))
    risk = report.future_risk["c1"][5]
    assert risk.net == pytest.approx(0.05 / 0.9)
    assert risk.crude == pytest.approx(risk.net)
    assert future_risk_net(report, pedigree, "c1", 5, db) == risk.net
    assert future_risk_crude(report, pedigree, "c1", 5, db) == risk.crude


def test_crude_below_net_with_death() -> None:
    db = _uniform_db(death=0.02)
    report = posterior(_solo(5), enumerate_pared(db.genes, 1), db, horizons=(10,))
    risk = report.future_risk["c1"][10]
    assert risk.crude < risk.net
    assert reported_risk(risk, RiskKind.CRUDE) == risk.crude
    assert reported_risk(risk, RiskKind.NET) == risk.net


def test_zero_horizon(small_db) -> None:
    report = posterior(_solo(10), enumerate_pared(small_db.genes, 1), small_db, horizons=(0,))
    assert report.future_risk["c1"][0] == FutureRisk(0.0, 0.0)


def test_risk_increases_with_horizon(db, space) -> None:
    report = posterior(handcrafted()[2], space, db, horizons=range(0, 30, 3))
    for cancer_id in db.cancers:
        risks = [report.future_risk[cancer_id][horizon].net for horizon in range(0, 30, 3)]
        assert (np.diff(risks) >= 0).all()
        assert risks[-1] > 0


def test_truncated_horizon() -> None:
    db = _uniform_db()
    pedigree = _solo(18)
    warnings = DiagnosticLog()
    report = posterior(pedigree, enumerate_pared(db.genes, 1), db, horizons=(5, 2), warnings=warnings)
    assert report.future_risk["c1"][5] == report.future_risk["c1"][2]
    assert any("truncated at age 20" in message for message in warnings)


def test_negative_horizon(small_db) -> None:
    with pytest.raises(InputError):
        posterior(_solo(10), enumerate_pared(small_db.genes, 1), small_db, horizons=(-1,))


def test_diagnosed_counselee(db, space) -> None:
    pedigree = _solo(50, cancers=[("breast", 45)])
    report = posterior(pedigree, space, db)
    assert "breast" not in report.future_risk
    assert "colorectal" in report.future_risk
    assert any("already diagnosed with breast" in message for message in report.diagnostics)
    with pytest.raises(InputError):
        future_risk(report, pedigree, "breast", 5, db)


@pytest.mark.parametrize("kind", ["relative-risk", "hazard-ratio"])
def test_neutral_intervention(kind) -> None:
    """
    An effect of 1 leaves posterior and risks untouched
    """
    db = parse_parameter_db(dict(small_doc(), interventions=[{"id": "x", "cancer": "c1", "kind": kind, "value": 1}]))
    space = enumerate_pared(db.genes, 1)
    plain = Pedigree((person("mother", F, 18, cancers=[("c1", 12)]), person("father", M, 19),
                      person("counselee", F, 10, "mother", "father")), "counselee", "trio")
    counselee = plain.members[2]._replace(interventions=(InterventionEntry("x", 5),))
    treated = plain._replace(members=plain.members[:2] + (counselee,))
    first, second = posterior(plain, space, db), posterior(treated, space, db)
    np.testing.assert_array_equal(first.genotype_posterior, second.genotype_posterior)
    assert first.future_risk == second.future_risk


def test_ancestry_override(db, space) -> None:
    family = handcrafted()[2]
    default = posterior(family, space, db)
    ashkenazi = posterior(family, space, db, ancestry="AJ")
    assert default.ancestry == "All" and ashkenazi.ancestry == "AJ"
    assert ashkenazi.per_gene["BRCA1"] != default.per_gene["BRCA1"]


def test_thirty_member_family_speed() -> None:
    """
    Eleven genes, at most two carried, thirty relatives in well under a second
    """
    template = FamilyTemplate(cousins=1, sisters=1, brothers=1, daughters=1, sons=1)
    assert template.relative_count() + 1 == 30
    db = synthetic_db(11)
    family = simulate_family(template, db, seed=11)
    space = enumerate_pared(db.genes, 2)
    space.transmission()
    elapsed = []
    for _ in range(3):
        start = time.perf_counter()
        report = posterior(family.pedigree, space, db)
        elapsed.append(time.perf_counter() - start)
    assert space.size == 67
    assert report.genotype_posterior.sum() == pytest.approx(1.0)
    assert min(elapsed) < 1.0
