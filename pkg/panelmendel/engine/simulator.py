"""Synthetic families drawn under the model's own assumptions.

Founders get Hardy-Weinberg genotypes over the full (unpared) space, children
inherit by Mendelian transmission, cancer onset ages are drawn from each person's
genotype-specific penetrance and recorded when they fall before the censoring age.
"""

import logging
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from panelmendel.engine.errors import InputError
from panelmendel.engine.genotype import gene_transmission, hardy_weinberg
from panelmendel.engine.likelihood import apply_relative_risk
from panelmendel.engine.model import EngineOptions, MultiCarrierRule, Sex
from panelmendel.engine.params import ParameterDB, PenetranceCurve, combine_factors
from panelmendel.engine.pedigree import CancerEntry, MarkerResult, Pedigree, Person

logger = logging.getLogger(__name__)

DEFAULT_CENSOR_AGE_RANGE = (20, 94)


class PrsConfig(NamedTuple):
    """Latent polygenic score: heritable SNP carrier indicators scaling every penetrance."""
    snp_count: int = 20
    minor_allele_frequency: float = 0.1
    low: float = 0.8
    high: float = 1.2

    @classmethod
    def parse(cls, text: str) -> "PrsConfig":
        """Parse "snps/maf/lo-hi", e.g. "20/0.1/0.8-1.2"."""
        try:
            snps, maf, multipliers = text.split("/")
            low, high = multipliers.split("-")
            config = cls(int(snps), float(maf), float(low), float(high))
        except ValueError:
            raise InputError(f"Cannot parse PRS configuration {text!r}, expected snps/maf/lo-hi")
        config.check()
        return config

    def check(self) -> None:
        if self.snp_count < 1:
            raise InputError("PRS needs at least one SNP")
        if not 0 < self.minor_allele_frequency < 1:
            raise InputError("PRS minor allele frequency must be in (0, 1)")
        if not 0 < self.low <= 1 <= self.high:
            raise InputError("PRS multipliers must satisfy 0 < low <= 1 <= high")

    def factor(self, score: int) -> float:
        return self.low + (self.high - self.low) * score / self.snp_count

    def __str__(self) -> str:
        return f"{self.snp_count}/{self.minor_allele_frequency}/{self.low}-{self.high}"


class FamilyTemplate(NamedTuple):
    """Relative counts around the counselee.

    Aunts and uncles need grandparents. Every aunt or uncle with cousins gets a
    spouse, and so do the counselee and siblings when they have children.
    """
    grandparents: bool = True
    maternal_aunts: int = 1
    maternal_uncles: int = 1
    paternal_aunts: int = 1
    paternal_uncles: int = 1
    cousins: int = 0
    sisters: int = 1
    brothers: int = 1
    daughters: int = 1
    sons: int = 1

    @classmethod
    def named(cls, name: str) -> "FamilyTemplate":
        try:
            return TEMPLATES[name]
        except KeyError:
            raise InputError(f"Unknown family template {name!r} (known: {', '.join(TEMPLATES)})")

    def check(self) -> None:
        counts = [self.maternal_aunts, self.maternal_uncles, self.paternal_aunts, self.paternal_uncles,
                  self.cousins, self.sisters, self.brothers, self.daughters, self.sons]
        if any(count < 0 for count in counts):
            raise InputError("Template counts must be >= 0")
        if not self.grandparents and sum(counts[:4]):
            raise InputError("Aunts and uncles need grandparents in the template")

    def relative_count(self) -> int:
        parents_siblings = self.maternal_aunts + self.maternal_uncles + self.paternal_aunts + self.paternal_uncles
        siblings = self.sisters + self.brothers
        children = self.daughters + self.sons
        count = 2 + (4 if self.grandparents else 0)
        count += parents_siblings * (1 + (1 + self.cousins if self.cousins else 0))
        count += siblings + (siblings + 1) * (children + (1 if children else 0))
        return count


TEMPLATES = {
    "trio": FamilyTemplate(grandparents=False, maternal_aunts=0, maternal_uncles=0, paternal_aunts=0,
                           paternal_uncles=0, sisters=0, brothers=0, daughters=0, sons=0),
    "nuclear": FamilyTemplate(grandparents=False, maternal_aunts=0, maternal_uncles=0, paternal_aunts=0,
                              paternal_uncles=0, sisters=1, brothers=1, daughters=0, sons=0),
    "standard": FamilyTemplate(),
    # 112 relatives around the counselee
    "large": FamilyTemplate(maternal_aunts=3, maternal_uncles=3, paternal_aunts=3, paternal_uncles=3, cousins=4,
                            sisters=3, brothers=3, daughters=2, sons=1),
}


class SimulatedFamily(NamedTuple):
    pedigree: Pedigree
    genotypes: Dict[str, Tuple[int, ...]]
    prs_scores: Dict[str, int]


class _Slot(NamedTuple):
    person_id: str
    sex: Sex
    mother_id: Optional[str]
    father_id: Optional[str]


def _opposite(sex: Sex) -> Sex:
    return Sex.MALE if sex == Sex.FEMALE else Sex.FEMALE


def family_skeleton(template: FamilyTemplate, counselee_sex: Sex) -> List[_Slot]:
    """Members in generation order, parents before children."""
    template.check()
    slots: List[_Slot] = []

    def parents_of(person_id: str, sex: Sex) -> Tuple[Optional[str], Optional[str]]:
        spouse = f"{person_id}_spouse"
        slots.append(_Slot(spouse, _opposite(sex), None, None))
        return (person_id, spouse) if sex == Sex.FEMALE else (spouse, person_id)

    if template.grandparents:
        slots += [_Slot("mat_grandmother", Sex.FEMALE, None, None), _Slot("mat_grandfather", Sex.MALE, None, None),
                  _Slot("pat_grandmother", Sex.FEMALE, None, None), _Slot("pat_grandfather", Sex.MALE, None, None)]
        maternal = ("mat_grandmother", "mat_grandfather")
        paternal = ("pat_grandmother", "pat_grandfather")
    else:
        maternal = paternal = (None, None)
    slots += [_Slot("mother", Sex.FEMALE, *maternal), _Slot("father", Sex.MALE, *paternal)]

    sides = (("mat", maternal, template.maternal_aunts, template.maternal_uncles),
             ("pat", paternal, template.paternal_aunts, template.paternal_uncles))
    for side, grandparents, aunts, uncles in sides:
        for kind, sex, count in (("aunt", Sex.FEMALE, aunts), ("uncle", Sex.MALE, uncles)):
            for i in range(1, count + 1):
                person_id = f"{side}_{kind}{i}"
                slots.append(_Slot(person_id, sex, *grandparents))
                if template.cousins:
                    mother, father = parents_of(person_id, sex)
                    for j in range(1, template.cousins + 1):
                        child_sex = Sex.FEMALE if j % 2 else Sex.MALE
                        slots.append(_Slot(f"{person_id}_child{j}", child_sex, mother, father))

    parents = ("mother", "father")
    generation = [("counselee", counselee_sex)]
    generation += [(f"sister{i}", Sex.FEMALE) for i in range(1, template.sisters + 1)]
    generation += [(f"brother{i}", Sex.MALE) for i in range(1, template.brothers + 1)]
    for person_id, sex in generation:
        slots.append(_Slot(person_id, sex, *parents))
    if template.daughters + template.sons:
        for person_id, sex in generation:
            mother, father = parents_of(person_id, sex)
            children = [(f"{person_id}_daughter{j}", Sex.FEMALE) for j in range(1, template.daughters + 1)]
            children += [(f"{person_id}_son{j}", Sex.MALE) for j in range(1, template.sons + 1)]
            for child_id, child_sex in children:
                slots.append(_Slot(child_id, child_sex, mother, father))
    return slots


class _Sampler:
    """Cumulative onset distributions per (factor set, sex, cancer), built on demand."""

    def __init__(self, db: ParameterDB, ancestry: str, rule: MultiCarrierRule) -> None:
        self.db = db
        self.ancestry = ancestry
        self.rule = rule
        self._curves: Dict[Tuple, PenetranceCurve] = {}

    def curve(self, genotype: Tuple[int, ...], cancer_id: str, sex: Sex) -> PenetranceCurve:
        """Onset distribution of a genotype for one cancer.

        Multi-carriers draw from the curve with survival prod_k S_k(t), so the
        probability of staying unaffected matches the likelihood's product of
        survival terms. An onset at age t has probability S(t-1) - S(t), which is
        not the product of the single-gene densities used for an observed onset;
        that product is not a distribution and cannot be sampled.
        """
        keys = tuple((gene.gene_id, state) for gene, state in zip(self.db.genes, genotype)
                     if state and self.db.carrier(gene.gene_id, state, cancer_id, sex) is not None)
        cache_key = (keys, cancer_id, sex)
        if cache_key not in self._curves:
            if keys:
                curves = [self.db.carrier(gene_id, state, cancer_id, sex) for gene_id, state in keys]
                if self.rule == MultiCarrierRule.MAX:
                    curves = [max(curves, key=lambda c: c.total())]
                self._curves[cache_key] = combine_factors(curves, self.rule)
            else:
                self._curves[cache_key] = self.db.noncarrier(cancer_id, sex, self.ancestry)
        return self._curves[cache_key]

    def secondary_curve(self, genotype: Tuple[int, ...], primary_id: str, sex: Sex) -> Optional[PenetranceCurve]:
        entry = self.db.secondary[primary_id]
        curves = [entry.carrier[(gene.gene_id, state, sex)] for gene, state in zip(self.db.genes, genotype)
                  if state and (gene.gene_id, state, sex) in entry.carrier]
        if not curves:
            return entry.noncarrier.get(sex)
        if self.rule == MultiCarrierRule.MAX:
            curves = [max(curves, key=lambda c: c.total())]
        return combine_factors(curves, self.rule)


def _draw_age(rng: np.random.Generator, curve: PenetranceCurve) -> Optional[int]:
    """Onset age 1..max_age, or None when the residual mass is drawn."""
    position = int(np.searchsorted(np.cumsum(curve.values), rng.random(), side="right"))
    return position + 1 if position < curve.max_age else None


def _marker_positive(rng: np.random.Generator, db: ParameterDB, marker_id: str,
                     genotype: Tuple[int, ...]) -> bool:
    marker = db.markers[marker_id]
    for marker_class in marker.classes:
        if any(genotype[db.gene_index(gene_id)] for gene_id in marker_class.genes):
            return bool(rng.random() < marker_class.sensitivity)
    return bool(rng.random() < 1.0 - marker.specificity)


def simulate_family(template: FamilyTemplate, db: ParameterDB, ancestry: Optional[str] = None,
                    seed=None, prs: Optional[PrsConfig] = None, family_id: str = "",
                    censor_age_range: Tuple[int, int] = DEFAULT_CENSOR_AGE_RANGE,
                    options: EngineOptions = EngineOptions(), sampler: Optional[_Sampler] = None) -> SimulatedFamily:
    """One family with hidden genotypes; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    ancestry = ancestry or db.default_ancestry
    sampler = sampler or _Sampler(db, ancestry, options.multi_carrier_rule)
    low_age, high_age = censor_age_range
    if not 1 <= low_age <= high_age <= db.max_age:
        raise InputError(f"Censoring age range {censor_age_range} outside 1..{db.max_age}")

    counselee_sex = Sex.FEMALE if rng.random() < 0.5 else Sex.MALE
    slots = family_skeleton(template, counselee_sex)

    # Genotypes and latent scores
    founder_marginals = [hardy_weinberg(gene.state_count, gene.allele_frequency[ancestry]) for gene in db.genes]
    transmissions = [gene_transmission(gene.state_count) for gene in db.genes]
    snp_marginal = hardy_weinberg(2, prs.minor_allele_frequency) if prs else None
    snp_transmission = gene_transmission(2)
    genotypes: Dict[str, Tuple[int, ...]] = {}
    snps: Dict[str, np.ndarray] = {}
    for slot in slots:
        if slot.mother_id is None:
            states = [int(rng.choice(len(marginal), p=marginal)) for marginal in founder_marginals]
            if prs:
                snps[slot.person_id] = (rng.random(prs.snp_count) < snp_marginal[1]).astype(int)
        else:
            mother, father = genotypes[slot.mother_id], genotypes[slot.father_id]
            states = [int(rng.choice(len(table), p=table[:, mother[k], father[k]]))
                      for k, table in enumerate(transmissions)]
            if prs:
                carrier = snp_transmission[1, snps[slot.mother_id], snps[slot.father_id]]
                snps[slot.person_id] = (rng.random(prs.snp_count) < carrier).astype(int)
        genotypes[slot.person_id] = tuple(states)

    members = []
    scores = {}
    for slot in slots:
        genotype = genotypes[slot.person_id]
        censor_age = int(rng.integers(low_age, high_age + 1))
        deceased = False
        death_age = _draw_age(rng, db.death(slot.sex))
        if death_age is not None and death_age < censor_age:
            censor_age, deceased = death_age, True
        factor = 1.0
        if prs:
            scores[slot.person_id] = int(snps[slot.person_id].sum())
            factor = prs.factor(scores[slot.person_id])

        cancers: List[CancerEntry] = []
        for cancer_id in db.cancers:
            curve = sampler.curve(genotype, cancer_id, slot.sex)
            if factor != 1.0:
                curve = apply_relative_risk(curve, factor, 1)
            age = _draw_age(rng, curve)
            if age is not None and age <= censor_age:
                cancers.append(CancerEntry(cancer_id, age))
        for entry in list(cancers):
            if entry.cancer_id not in db.secondary:
                continue
            curve = sampler.secondary_curve(genotype, entry.cancer_id, slot.sex)
            if curve is None:
                continue
            elapsed = _draw_age(rng, curve)
            if elapsed is not None and entry.age + elapsed - 1 <= censor_age:
                cancers.append(CancerEntry(db.secondary[entry.cancer_id].secondary, entry.age + elapsed - 1))
        affected = {entry.cancer_id for entry in cancers}
        markers = tuple(MarkerResult(marker_id, _marker_positive(rng, db, marker_id, genotype))
                        for marker_id, marker in sorted(db.markers.items()) if marker.cancer_id in affected)
        members.append(Person(slot.person_id, slot.sex, censor_age, slot.mother_id, slot.father_id, deceased,
                              ancestry, tuple(cancers), markers))

    pedigree = Pedigree(tuple(members), "counselee", family_id)
    return SimulatedFamily(pedigree, genotypes, scores)


def family_seeds(seed: int, count: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


def simulate_cohort(count: int, template: FamilyTemplate, db: ParameterDB, seed: int,
                    prs: Optional[PrsConfig] = None, ancestry: Optional[str] = None,
                    censor_age_range: Tuple[int, int] = DEFAULT_CENSOR_AGE_RANGE,
                    options: EngineOptions = EngineOptions()) -> Iterator[SimulatedFamily]:
    """Families fam000000, fam000001, ...; family i uses the i-th spawned seed."""
    if count < 1:
        raise InputError("Cohort size must be >= 1")
    ancestry = ancestry or db.default_ancestry
    sampler = _Sampler(db, ancestry, options.multi_carrier_rule)
    for index, family_seed in enumerate(family_seeds(seed, count)):
        yield simulate_family(template, db, ancestry, family_seed, prs, family_label(index), censor_age_range,
                              options, sampler)


def family_label(index: int) -> str:
    return f"fam{index:06d}"


def truth_labels(family: SimulatedFamily, gene_ids: Sequence[str]) -> List[Tuple[str, str, int]]:
    """(familyId, geneId, trueState) rows for the counselee."""
    states = family.genotypes[family.pedigree.counselee_id]
    return [(family.pedigree.family_id, gene_id, int(state)) for gene_id, state in zip(gene_ids, states)]
