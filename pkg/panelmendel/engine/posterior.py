import logging
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from panelmendel.engine.errors import ImpossibilityError, InputError, InvariantError
from panelmendel.engine.genotype import ParedGenotypeSpace, founder_prior
from panelmendel.engine.likelihood import (ModifiedCurveCache, carried_keys, multi_carrier_penetrance,
                                           person_modifier)
from panelmendel.engine.model import DiagnosticLog, EngineOptions, RiskKind
from panelmendel.engine.params import ParameterDB, PenetranceCurve, net_to_crude
from panelmendel.engine.pedigree import Pedigree, require_valid
from panelmendel.engine.peeling import family_ancestry, peel_paring

logger = logging.getLogger(__name__)

ANY_GROUP = "Any"
NORMALIZATION_TOLERANCE = 1e-9


class FutureRisk(NamedTuple):
    net: float
    crude: float


class PosteriorReport(NamedTuple):
    family_id: str
    counselee_id: str
    ancestry: str
    gene_ids: Tuple[str, ...]
    genotypes: np.ndarray
    genotype_posterior: np.ndarray
    per_gene: Dict[str, float]
    groups: Dict[str, float]
    future_risk: Dict[str, Dict[int, FutureRisk]]
    log_likelihood: float
    diagnostics: List[str]


def carrier_probabilities(genotypes: np.ndarray, distribution: np.ndarray, gene_ids: Sequence[str],
                          groups: Dict[str, Sequence[str]]) -> Tuple[Dict[str, float], Dict[str, float]]:
    """Per-gene and grouped carrier probabilities; a group carrier carries any of its genes."""
    per_gene = {gene_id: float(np.clip(distribution[genotypes[:, k] != 0].sum(), 0.0, 1.0))
                for k, gene_id in enumerate(gene_ids)}
    grouped = {}
    for name, members in list(groups.items()) + [(ANY_GROUP, list(gene_ids))]:
        columns = [gene_ids.index(gene_id) for gene_id in members]
        noncarrier = (genotypes[:, columns] == 0).all(axis=1)
        grouped[name] = float(np.clip(1.0 - distribution[noncarrier].sum(), 0.0, 1.0))
    return per_gene, grouped


def posterior(pedigree: Pedigree, space: ParedGenotypeSpace, db: ParameterDB,
              options: EngineOptions = EngineOptions(), ancestry: Optional[str] = None,
              horizons: Sequence[int] = (5, 10), cache: Optional[ModifiedCurveCache] = None,
              warnings: Optional[DiagnosticLog] = None,
              likelihoods: Optional[Dict[str, np.ndarray]] = None) -> PosteriorReport:
    """Counselee genotype posterior with carrier probabilities and future risks.

    The posterior is the founder prior of the counselee times P(H | G1 = g),
    whether or not the counselee's parents are in the pedigree. Precomputed
    person likelihoods may be passed in place of the phenotype model.
    """
    warnings = warnings if warnings is not None else DiagnosticLog(logger)
    warnings.extend_from(list(db.warnings))
    require_valid(pedigree, db)
    ancestry = family_ancestry(pedigree, db, ancestry)
    result = peel_paring(pedigree, space, db, options, ancestry, cache, warnings, likelihoods)

    weights = founder_prior(space, ancestry) * result.conditional
    total = weights.sum()
    if not total > 0:
        raise ImpossibilityError(f"Family history {pedigree.family_id} impossible under model")
    distribution = weights / total
    if abs(distribution.sum() - 1.0) > NORMALIZATION_TOLERANCE or not np.isfinite(distribution).all():
        raise InvariantError(f"Posterior of {pedigree.family_id} does not normalize")
    per_gene, groups = carrier_probabilities(space.states, distribution, db.gene_ids, db.groups)

    report = PosteriorReport(pedigree.family_id, pedigree.counselee_id, ancestry, db.gene_ids, space.states,
                             distribution, per_gene, groups, {}, float(np.log(total) + result.log_scale),
                             warnings)
    counselee = pedigree.counselee
    for cancer_id in db.cancers:
        if counselee.diagnosis_age(cancer_id) is not None:
            warnings.warn(f"{counselee.person_id} already diagnosed with {cancer_id}; no future risk")
            continue
        risks = {}
        for horizon in horizons:
            net, crude = future_risk(report, pedigree, cancer_id, horizon, db, options, cache, warnings)
            risks[horizon] = FutureRisk(net, crude)
        report.future_risk[cancer_id] = risks
    return report


def _window(pedigree: Pedigree, cancer_id: str, horizon: int, db: ParameterDB,
            warnings: Optional[DiagnosticLog]) -> Tuple[int, int]:
    counselee = pedigree.counselee
    if counselee.diagnosis_age(cancer_id) is not None:
        raise InputError(f"{counselee.person_id} already has {cancer_id}; future risk is conditional on being "
                         f"disease-free")
    if horizon < 0:
        raise InputError(f"Risk horizon must be >= 0, got {horizon}")
    start = counselee.censor_age
    end = start + horizon
    if end > db.max_age:
        if warnings is not None:
            warnings.warn(f"{horizon}-year risk of {cancer_id} truncated at age {db.max_age}")
        end = db.max_age
    return start, end


def future_risk(report: PosteriorReport, pedigree: Pedigree, cancer_id: str, horizon: int, db: ParameterDB,
                options: EngineOptions = EngineOptions(), cache: Optional[ModifiedCurveCache] = None,
                warnings: Optional[DiagnosticLog] = None) -> Tuple[float, float]:
    """Net and crude risk of the cancer within `horizon` years of the counselee's current age."""
    start, end = _window(pedigree, cancer_id, horizon, db, warnings)
    if end <= start:
        return 0.0, 0.0
    counselee = pedigree.counselee
    modifier = person_modifier(counselee, cancer_id, db, options, warnings)
    death = db.death(counselee.sex)
    alive = float(death.survival()[start])

    curves: Dict[Tuple, Tuple[PenetranceCurve, PenetranceCurve]] = {}
    net_risk = crude_risk = 0.0
    for index in np.nonzero(report.genotype_posterior > 0)[0]:
        genotype = report.genotypes[index]
        key = tuple(carried_keys(db, genotype, cancer_id, counselee.sex))
        if key not in curves:
            net = multi_carrier_penetrance(genotype, cancer_id, counselee.sex, db, report.ancestry,
                                           options.multi_carrier_rule, modifier, cache, warnings)
            curves[key] = (net, net_to_crude(net, death, warnings))
        net, crude = curves[key]
        free = 1.0 - net.cumulative(start)
        if not free > 0 or not alive > 0:
            raise ImpossibilityError(f"{counselee.person_id} cannot be disease-free and alive at {start} "
                                     f"under genotype {tuple(int(s) for s in genotype)}")
        weight = report.genotype_posterior[index]
        net_risk += weight * float(net.values[start:end].sum()) / free
        crude_risk += weight * float(crude.values[start:end].sum()) / (free * alive)
    return float(np.clip(net_risk, 0.0, 1.0)), float(np.clip(crude_risk, 0.0, 1.0))


def future_risk_net(report: PosteriorReport, pedigree: Pedigree, cancer_id: str, horizon: int, db: ParameterDB,
                    options: EngineOptions = EngineOptions(), cache: Optional[ModifiedCurveCache] = None,
                    warnings: Optional[DiagnosticLog] = None) -> float:
    return future_risk(report, pedigree, cancer_id, horizon, db, options, cache, warnings)[0]


def future_risk_crude(report: PosteriorReport, pedigree: Pedigree, cancer_id: str, horizon: int, db: ParameterDB,
                      options: EngineOptions = EngineOptions(), cache: Optional[ModifiedCurveCache] = None,
                      warnings: Optional[DiagnosticLog] = None) -> float:
    return future_risk(report, pedigree, cancer_id, horizon, db, options, cache, warnings)[1]


def reported_risk(risk: FutureRisk, kind: RiskKind) -> float:
    return risk.crude if kind == RiskKind.CRUDE else risk.net
