"""Gene and cancer collapsibility: a submodel must reproduce the full model's posterior.

Genes: excluded genes get allele frequency 0 in the full model. Cancers: the
excluded cancers must have genotype-independent penetrance; their histories are
dropped for the submodel.
"""

import logging
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from panelmendel.engine.errors import InputError, ModelError
from panelmendel.engine.fixtures import restrict_to
from panelmendel.engine.genotype import enumerate_pared
from panelmendel.engine.model import EngineOptions
from panelmendel.engine.params import (ParameterDB, restrict_cancers, restrict_genes, with_allele_frequencies,
                                       without_associations)
from panelmendel.engine.pedigree import Pedigree
from panelmendel.engine.posterior import posterior

logger = logging.getLogger(__name__)


class FixtureDiscrepancy(NamedTuple):
    family_id: str
    discrepancy: Optional[float]
    error: Optional[str] = None


class CollapseReport(NamedTuple):
    kind: str
    kept: List[str]
    excluded: List[str]
    condition_met: bool
    max_discrepancy: float
    fixtures: List[FixtureDiscrepancy]


def _compare(full_db: ParameterDB, sub_db: ParameterDB, fixtures: Sequence[Pedigree], sub_fixtures: Sequence[Pedigree],
             options: EngineOptions) -> List[FixtureDiscrepancy]:
    full_space = enumerate_pared(full_db.genes, options.max_carriers, cap=options.space_cap)
    sub_space = enumerate_pared(sub_db.genes, options.max_carriers, cap=options.space_cap)
    columns = [full_db.gene_index(gene_id) for gene_id in sub_db.gene_ids]
    excluded = [k for k in range(len(full_db.genes)) if k not in columns]
    # Full-model genotypes that exist in the submodel
    shared = [(index, sub_space.index_of[tuple(int(s) for s in row[columns])])
              for index, row in enumerate(full_space.states) if not row[excluded].any()]
    full_index = np.array([pair[0] for pair in shared], dtype=np.intp)
    sub_index = np.array([pair[1] for pair in shared], dtype=np.intp)

    results = []
    for full_pedigree, sub_pedigree in zip(fixtures, sub_fixtures):
        try:
            full = posterior(full_pedigree, full_space, full_db, options, horizons=())
            sub = posterior(sub_pedigree, sub_space, sub_db, options, horizons=())
        except ModelError as e:
            results.append(FixtureDiscrepancy(full_pedigree.family_id, None, str(e)))
            continue
        delta = np.abs(full.genotype_posterior[full_index] - sub.genotype_posterior[sub_index])
        results.append(FixtureDiscrepancy(full_pedigree.family_id, float(delta.max()) if delta.size else 0.0))
    return results


def _report(kind: str, kept: Sequence[str], excluded: Sequence[str], condition_met: bool,
            results: List[FixtureDiscrepancy]) -> CollapseReport:
    values = [result.discrepancy for result in results if result.discrepancy is not None]
    report = CollapseReport(kind, list(kept), list(excluded), condition_met, max(values) if values else 0.0, results)
    logger.info(f"Collapsibility over {kind} {list(kept)}: max discrepancy {report.max_discrepancy:.3g}"
                f"{'' if condition_met else ' (condition not met)'}")
    return report


def gene_collapse_check(db: ParameterDB, gene_subset: Sequence[str], fixtures: Sequence[Pedigree],
                        options: EngineOptions = EngineOptions()) -> CollapseReport:
    unknown = [gene_id for gene_id in gene_subset if gene_id not in db.gene_ids]
    if unknown:
        raise InputError(f"Unknown genes {unknown}")
    excluded = [gene_id for gene_id in db.gene_ids if gene_id not in gene_subset]
    options = options._replace(use_modifiers=False)
    full_db = with_allele_frequencies(db, {gene_id: 0.0 for gene_id in excluded})
    sub_db = restrict_genes(db, gene_subset)
    sub_fixtures = [_drop_gene_evidence(pedigree, excluded) for pedigree in fixtures]
    results = _compare(full_db, sub_db, sub_fixtures, sub_fixtures, options)
    return _report("genes", gene_subset, excluded, True, results)


def _drop_gene_evidence(pedigree: Pedigree, gene_ids: Sequence[str]) -> Pedigree:
    members = tuple(member._replace(germline=tuple(test for test in member.germline if test.gene_id not in gene_ids))
                    for member in pedigree.members)
    return pedigree._replace(members=members)


def cancer_condition_met(db: ParameterDB, excluded: Sequence[str]) -> bool:
    """True when every excluded cancer (and its secondary cancer) is genotype-independent."""
    for key in db.carrier_penetrance:
        if key[2] in excluded:
            return False
    return not any(db.secondary[cancer_id].carrier for cancer_id in excluded if cancer_id in db.secondary)


def cancer_collapse_check(db: ParameterDB, cancer_subset: Sequence[str], fixtures: Sequence[Pedigree],
                          options: EngineOptions = EngineOptions(), force_condition: bool = False) -> CollapseReport:
    """Compare against the model without the excluded cancers.

    With `force_condition` the excluded cancers lose their carrier associations
    first; otherwise a violated condition is reported, not raised.
    """
    unknown = [cancer_id for cancer_id in cancer_subset if cancer_id not in db.cancers]
    if unknown:
        raise InputError(f"Unknown cancers {unknown}")
    excluded = [cancer_id for cancer_id in db.cancers if cancer_id not in cancer_subset]
    options = options._replace(use_modifiers=False)
    full_db = without_associations(db, excluded) if force_condition else db
    sub_db = restrict_cancers(db, cancer_subset)
    sub_fixtures = [restrict_to(pedigree, sub_db) for pedigree in fixtures]
    results = _compare(full_db, sub_db, fixtures, sub_fixtures, options)
    return _report("cancers", cancer_subset, excluded, cancer_condition_met(full_db, excluded), results)


def collapse_check(db: ParameterDB, fixtures: Sequence[Pedigree], gene_subset: Optional[Sequence[str]] = None,
                   cancer_subset: Optional[Sequence[str]] = None, options: EngineOptions = EngineOptions(),
                   force_condition: bool = False) -> List[CollapseReport]:
    reports = []
    if gene_subset is not None:
        reports.append(gene_collapse_check(db, gene_subset, fixtures, options))
    if cancer_subset is not None:
        reports.append(cancer_collapse_check(db, cancer_subset, fixtures, options, force_condition))
    return reports
