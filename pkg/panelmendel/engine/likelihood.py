"""Per-person phenotype likelihoods over the pared genotype space."""

import logging
import threading
from typing import Callable, Dict, Hashable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from panelmendel.engine.errors import ImpossibilityError, InputError, ParameterError
from panelmendel.engine.genotype import ParedGenotypeSpace
from panelmendel.engine.model import DiagnosticLog, EffectKind, EngineOptions, GermlineResult, MultiCarrierRule, Sex
from panelmendel.engine.params import InterventionEffect, ParameterDB, PenetranceCurve, combine_factors
from panelmendel.engine.pedigree import Person

logger = logging.getLogger(__name__)

NONCARRIER = ("noncarrier",)


class Modifier(NamedTuple):
    effect: InterventionEffect
    age: int


class ModifiedCurveCache:
    """Memoized modified curves; safe for concurrent readers and idempotent inserts."""

    def __init__(self) -> None:
        self._entries: Dict[Hashable, Tuple[PenetranceCurve, Tuple[str, ...]]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def get(self, key: Hashable, compute: Callable[[DiagnosticLog], PenetranceCurve],
            warnings: Optional[DiagnosticLog] = None) -> PenetranceCurve:
        with self._lock:
            entry = self._entries.get(key)
        if entry is None:
            log = DiagnosticLog(logger)
            curve = compute(log)
            with self._lock:
                entry = self._entries.setdefault(key, (curve, tuple(log)))
        if warnings is not None:
            warnings.extend_from(entry[1])
        return entry[0]


# -- modifiers -------------------------------------------------------------------------------------

def apply_relative_risk(curve: PenetranceCurve, relative_risk: float, intervention_age: int,
                        warnings: Optional[DiagnosticLog] = None) -> PenetranceCurve:
    """pen(t) * RR from the intervention age on; cumulative risk capped at 1."""
    if relative_risk == 1.0:
        return curve
    values = curve.values.copy()
    start = max(intervention_age, 1) - 1
    values[start:] *= relative_risk
    cumulative = np.cumsum(values)
    if cumulative[-1] > 1.0:
        crossing = int(np.argmax(cumulative > 1.0))
        values[crossing] = 1.0 - (cumulative[crossing - 1] if crossing else 0.0)
        values[crossing + 1:] = 0.0
        message = f"Relative risk {relative_risk} pushed cumulative risk above 1 at age {crossing + 1}; clamped"
        if warnings is not None:
            warnings.warn(message)
        else:
            logger.warning(message)
    return PenetranceCurve(values)


def apply_hazard_ratio(curve: PenetranceCurve, hazard_ratio: float, intervention_age: int,
                       warnings: Optional[DiagnosticLog] = None) -> PenetranceCurve:
    """Scale the discrete hazard from the intervention age on.

    pen_mod(t) = S_mod(t-1) - S_mod(t); ages before the intervention keep their values.
    """
    if hazard_ratio == 1.0:
        return curve
    start = max(intervention_age, 1) - 1
    if start >= curve.max_age:
        return curve
    hazards = curve.hazards()[start:] * hazard_ratio
    if (hazards > 1.0).any():
        ages = [int(age) for age in np.nonzero(hazards > 1.0)[0] + start + 1]
        message = f"Hazard ratio {hazard_ratio} gives hazard above 1 at ages {ages}; clamped"
        if warnings is not None:
            warnings.warn(message)
        else:
            logger.warning(message)
        hazards = np.minimum(hazards, 1.0)
    survival = curve.survival()[start] * np.concatenate(([1.0], np.cumprod(1.0 - hazards)))
    values = curve.values.copy()
    values[start:] = survival[:-1] - survival[1:]
    return PenetranceCurve(values)


def apply_modifier(curve: PenetranceCurve, modifier: Optional[Modifier],
                   warnings: Optional[DiagnosticLog] = None) -> PenetranceCurve:
    if modifier is None:
        return curve
    if modifier.effect.kind == EffectKind.RELATIVE_RISK:
        return apply_relative_risk(curve, modifier.effect.value, modifier.age, warnings)
    return apply_hazard_ratio(curve, modifier.effect.value, modifier.age, warnings)


def person_modifier(person: Person, cancer_id: str, db: ParameterDB, options: EngineOptions,
                    warnings: Optional[DiagnosticLog] = None) -> Optional[Modifier]:
    """Earliest intervention affecting the cancer; later ones are ignored with a warning."""
    if not options.use_modifiers:
        return None
    candidates = sorted((entry.age, entry.intervention_id) for entry in person.interventions
                        if (entry.intervention_id, cancer_id) in db.intervention_effects)
    if not candidates:
        return None
    if len(candidates) > 1 and warnings is not None:
        warnings.warn(f"{person.person_id}: several interventions affect {cancer_id}; "
                      f"only {candidates[0][1]} at age {candidates[0][0]} is used")
    age, intervention_id = candidates[0]
    return Modifier(db.intervention_effects[(intervention_id, cancer_id)], age)


# -- factor curves ---------------------------------------------------------------------------------

def _sex(person: Person) -> Sex:
    if person.sex is None:
        raise InputError(f"{person.person_id}: unknown sex")
    return person.sex


def factor_curve(db: ParameterDB, factor: Tuple, cancer_id: str, sex: Sex, ancestry: str,
                 modifier: Optional[Modifier] = None, cache: Optional[ModifiedCurveCache] = None,
                 warnings: Optional[DiagnosticLog] = None) -> PenetranceCurve:
    """Noncarrier or (gene, state) carrier curve with the person's modifier applied."""
    if factor == NONCARRIER:
        base = db.noncarrier(cancer_id, sex, ancestry)
    else:
        base = db.carrier(factor[0], factor[1], cancer_id, sex)
        if base is None:
            raise ParameterError(f"No carrier curve for {factor[0]} state {factor[1]} and {cancer_id}")
    if modifier is None:
        return base
    if cache is None:
        return apply_modifier(base, modifier, warnings)
    key = (factor, cancer_id, sex, ancestry, modifier)
    return cache.get(key, lambda log: apply_modifier(base, modifier, log), warnings)


def carried_keys(db: ParameterDB, genotype: Sequence[int], cancer_id: str, sex: Sex) -> List[Tuple]:
    """(gene, state) factors of the genotype associated with the cancer."""
    keys = []
    for gene, state in zip(db.genes, genotype):
        if state and db.carrier(gene.gene_id, int(state), cancer_id, sex) is not None:
            keys.append((gene.gene_id, int(state)))
    return keys


def _select(curves: List[PenetranceCurve], rule: MultiCarrierRule) -> List[PenetranceCurve]:
    if rule == MultiCarrierRule.MAX and len(curves) > 1:
        return [max(curves, key=lambda curve: curve.total())]
    return curves


def multi_carrier_penetrance(genotype: Sequence[int], cancer_id: str, sex: Sex, db: ParameterDB,
                             ancestry: Optional[str] = None,
                             rule: MultiCarrierRule = MultiCarrierRule.PRODUCT,
                             modifier: Optional[Modifier] = None, cache: Optional[ModifiedCurveCache] = None,
                             warnings: Optional[DiagnosticLog] = None) -> PenetranceCurve:
    """Penetrance curve of a genotype for one cancer.

    No associated carried gene gives the noncarrier curve; a single one gives its
    carrier curve; several combine by multiplying survivals.
    """
    ancestry = ancestry or db.default_ancestry
    keys = carried_keys(db, genotype, cancer_id, sex) or [NONCARRIER]
    curves = [factor_curve(db, key, cancer_id, sex, ancestry, modifier, cache, warnings) for key in keys]
    return combine_factors(_select(curves, rule), rule)


def _term(curve: PenetranceCurve, person: Person, age: Optional[int]) -> float:
    if age is None:
        return 1.0 - curve.cumulative(person.censor_age)
    return curve.at(age)


def _check_age(person: Person, age: Optional[int], db: ParameterDB, cancer_id: str) -> None:
    if age is not None and not 1 <= age <= db.max_age:
        raise InputError(f"{person.person_id}: diagnosis age {age} of {cancer_id} outside 1..{db.max_age}")
    if person.censor_age is None or not 1 <= person.censor_age <= db.max_age:
        raise InputError(f"{person.person_id}: censoring age {person.censor_age} outside 1..{db.max_age}")


def cancer_likelihood(person: Person, cancer_id: str, genotype: Sequence[int], db: ParameterDB,
                      options: EngineOptions = EngineOptions(), ancestry: Optional[str] = None,
                      cache: Optional[ModifiedCurveCache] = None,
                      warnings: Optional[DiagnosticLog] = None) -> float:
    """P(H_r | g): survival to the censoring age when unaffected, density at diagnosis otherwise.

    Multi-carriers multiply the single-gene terms.
    """
    ancestry = ancestry or db.default_ancestry
    sex = _sex(person)
    age = person.diagnosis_age(cancer_id)
    _check_age(person, age, db, cancer_id)
    modifier = person_modifier(person, cancer_id, db, options, warnings)
    keys = carried_keys(db, genotype, cancer_id, sex) or [NONCARRIER]
    curves = [factor_curve(db, key, cancer_id, sex, ancestry, modifier, cache, warnings) for key in keys]
    likelihood = 1.0
    for curve in _select(curves, options.multi_carrier_rule):
        likelihood *= _term(curve, person, age)
    return likelihood


def secondary_cancer_likelihood(person: Person, primary_id: str, secondary_id: str, genotype: Sequence[int],
                                db: ParameterDB, options: EngineOptions = EngineOptions()) -> float:
    """Likelihood of the secondary cancer history, curves indexed by years since the primary."""
    primary_age = person.diagnosis_age(primary_id)
    if primary_age is None:
        return 1.0
    sex = _sex(person)
    link = db.secondary.get(primary_id)
    if link is None or link.secondary != secondary_id:
        raise ParameterError(f"No secondary cancer {secondary_id} defined for {primary_id}")
    secondary_age = person.diagnosis_age(secondary_id)
    if secondary_age is not None and secondary_age < primary_age:
        raise InputError(f"{person.person_id}: {secondary_id} at {secondary_age} precedes {primary_id} "
                         f"at {primary_age}")
    curves = [link.carrier[(gene.gene_id, int(state), sex)] for gene, state in zip(db.genes, genotype)
              if state and (gene.gene_id, int(state), sex) in link.carrier]
    if not curves:
        curves = [_secondary_noncarrier(link, sex)]
    likelihood = 1.0
    for curve in _select(curves, options.multi_carrier_rule):
        likelihood *= _secondary_term(curve, person, primary_age, secondary_age)
    return likelihood


def _secondary_noncarrier(link, sex: Sex) -> PenetranceCurve:
    try:
        return link.noncarrier[sex]
    except KeyError:
        raise ParameterError(f"Missing noncarrier curve of {link.secondary} for sex {sex.value}")


def _secondary_term(curve: PenetranceCurve, person: Person, primary_age: int, secondary_age: Optional[int]) -> float:
    if secondary_age is None:
        return 1.0 - float(curve.values[:person.censor_age - primary_age + 1].sum())
    return float(curve.values[secondary_age - primary_age])


def evidence_multiplier(person: Person, genotype: Sequence[int], db: ParameterDB,
                        options: EngineOptions = EngineOptions()) -> float:
    """Germline test and tumor marker factors under conditional independence."""
    multiplier = 1.0
    for test in person.germline:
        carrier = bool(genotype[db.gene_index(test.gene_id)])
        multiplier *= _germline_factor(carrier, test.result, options)
    if options.use_modifiers:
        for result in person.markers:
            sensitivity = _marker_sensitivity(db, result.marker_id, genotype)
            multiplier *= _marker_factor(sensitivity, db.markers[result.marker_id].specificity, result.positive)
    return float(multiplier)


def _germline_factor(carrier, result: GermlineResult, options: EngineOptions):
    if result == GermlineResult.CARRIER:
        return np.where(carrier, options.germline_sensitivity, 1.0 - options.germline_specificity)
    return np.where(carrier, 1.0 - options.germline_sensitivity, options.germline_specificity)


def _marker_sensitivity(db: ParameterDB, marker_id: str, genotype: Sequence[int]) -> Optional[float]:
    if marker_id not in db.markers:
        raise InputError(f"Unknown marker {marker_id}")
    for marker_class in db.markers[marker_id].classes:
        if any(genotype[db.gene_index(gene_id)] for gene_id in marker_class.genes):
            return marker_class.sensitivity
    return None


def _marker_factor(sensitivity: Optional[float], specificity: float, positive: bool) -> float:
    if sensitivity is None:
        return 1.0 - specificity if positive else specificity
    return sensitivity if positive else 1.0 - sensitivity


# -- vectorized over the space ---------------------------------------------------------------------

class _Layout(NamedTuple):
    keys: List[Tuple]
    index: np.ndarray
    associated: np.ndarray


def _layout(space: ParedGenotypeSpace, lookup: Callable[[str, int], bool]) -> _Layout:
    """Index matrix into a factor list padded with a neutral slot, one column per gene."""
    keys: List[Tuple] = [NONCARRIER]
    index = np.empty((space.size, space.gene_count), dtype=np.intp)
    tables = []
    for gene in space.genes:
        table = np.full(gene.state_count, -1, dtype=np.intp)
        for state in range(1, gene.state_count):
            if lookup(gene.gene_id, state):
                table[state] = len(keys)
                keys.append((gene.gene_id, state))
        tables.append(table)
    neutral = len(keys)
    for k, table in enumerate(tables):
        column = table[space.states[:, k].astype(np.intp)]
        index[:, k] = np.where(column < 0, neutral, column)
    associated = (index != neutral).any(axis=1) if space.gene_count else np.zeros(space.size, dtype=bool)
    return _Layout(keys, index, associated)


def _combine_terms(layout: _Layout, terms: np.ndarray, totals: np.ndarray, rule: MultiCarrierRule) -> np.ndarray:
    padded = np.append(terms, 1.0)
    if rule == MultiCarrierRule.MAX and layout.index.shape[1]:
        ranked = np.append(totals, -np.inf)[layout.index]
        choice = layout.index[np.arange(layout.index.shape[0]), np.argmax(ranked, axis=1)]
        combined = padded[choice]
    else:
        combined = np.prod(padded[layout.index], axis=1)
    return np.where(layout.associated, combined, terms[0])


def cancer_likelihood_vector(person: Person, cancer_id: str, space: ParedGenotypeSpace, db: ParameterDB,
                             options: EngineOptions, ancestry: str, cache: Optional[ModifiedCurveCache] = None,
                             warnings: Optional[DiagnosticLog] = None) -> np.ndarray:
    sex = _sex(person)
    age = person.diagnosis_age(cancer_id)
    _check_age(person, age, db, cancer_id)
    modifier = person_modifier(person, cancer_id, db, options, warnings)
    layout = _layout(space, lambda gene_id, state: db.carrier(gene_id, state, cancer_id, sex) is not None)
    curves = [factor_curve(db, key, cancer_id, sex, ancestry, modifier, cache, warnings) for key in layout.keys]
    terms = np.array([_term(curve, person, age) for curve in curves])
    totals = np.array([curve.total() for curve in curves])
    return _combine_terms(layout, terms, totals, options.multi_carrier_rule)


def secondary_likelihood_vector(person: Person, primary_id: str, space: ParedGenotypeSpace, db: ParameterDB,
                                options: EngineOptions) -> np.ndarray:
    primary_age = person.diagnosis_age(primary_id)
    if primary_age is None:
        return np.ones(space.size)
    sex = _sex(person)
    link = db.secondary[primary_id]
    secondary_age = person.diagnosis_age(link.secondary)
    if secondary_age is not None and secondary_age < primary_age:
        raise InputError(f"{person.person_id}: {link.secondary} at {secondary_age} precedes {primary_id} "
                         f"at {primary_age}")
    layout = _layout(space, lambda gene_id, state: (gene_id, state, sex) in link.carrier)
    curves = [_secondary_noncarrier(link, sex)] + [link.carrier[(key[0], key[1], sex)] for key in layout.keys[1:]]
    terms = np.array([_secondary_term(curve, person, primary_age, secondary_age) for curve in curves])
    totals = np.array([curve.total() for curve in curves])
    return _combine_terms(layout, terms, totals, options.multi_carrier_rule)


def evidence_vector(person: Person, space: ParedGenotypeSpace, db: ParameterDB, options: EngineOptions) -> np.ndarray:
    vector = np.ones(space.size)
    for test in person.germline:
        vector *= _germline_factor(space.carrier_mask(db.gene_index(test.gene_id)), test.result, options)
    if not options.use_modifiers:
        return vector
    for result in person.markers:
        if result.marker_id not in db.markers:
            raise InputError(f"Unknown marker {result.marker_id}")
        marker = db.markers[result.marker_id]
        sensitivity = np.full(space.size, np.nan)
        for marker_class in marker.classes:
            carried = np.zeros(space.size, dtype=bool)
            for gene_id in marker_class.genes:
                carried |= space.carrier_mask(db.gene_index(gene_id))
            sensitivity[carried & np.isnan(sensitivity)] = marker_class.sensitivity
        matched = ~np.isnan(sensitivity)
        if result.positive:
            vector *= np.where(matched, sensitivity, 1.0 - marker.specificity)
        else:
            vector *= np.where(matched, 1.0 - sensitivity, marker.specificity)
    return vector


def person_likelihood(person: Person, space: ParedGenotypeSpace, db: ParameterDB,
                      options: EngineOptions = EngineOptions(), ancestry: Optional[str] = None,
                      cache: Optional[ModifiedCurveCache] = None,
                      warnings: Optional[DiagnosticLog] = None) -> np.ndarray:
    """Likelihood of the person's whole history for every pared genotype."""
    ancestry = ancestry or db.default_ancestry
    known = set(db.cancers) | {link.secondary for link in db.secondary.values()}
    for entry in person.cancers:
        if entry.cancer_id not in known:
            raise InputError(f"{person.person_id}: unknown cancer {entry.cancer_id}")

    vector = np.ones(space.size)
    for cancer_id in db.cancers:
        vector *= cancer_likelihood_vector(person, cancer_id, space, db, options, ancestry, cache, warnings)
    for primary_id in db.secondary:
        vector *= secondary_likelihood_vector(person, primary_id, space, db, options)
    vector *= evidence_vector(person, space, db, options)
    if not vector.any():
        raise ImpossibilityError(f"Phenotype of {person.person_id} impossible under model")
    return vector
