"""Population-level model inputs: allele frequencies, penetrance curves, markers,
interventions and the death-by-other-causes distribution.

The parameter database is a single JSON document. Curves are per-year
probabilities for integer ages 1..maxAge (secondary-cancer curves are indexed by
years since the primary diagnosis, 0..maxAge-1). Noncarrier penetrances are not
stored: they are derived from population rates on load.
"""

import copy
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from panelmendel.engine.errors import ParameterError, ValidationError
from panelmendel.engine.model import DiagnosticLog, EffectKind, MultiCarrierRule, Sex

logger = logging.getLogger(__name__)

DEFAULT_MAX_AGE = 94
DEFAULT_CLAMP_TOLERANCE = 1e-3
# Slack for floating point sums of proper sub-distributions
_MASS_SLACK = 1e-9


class PenetranceCurve:
    """Per-year probabilities P(T = t), t = 1..max_age. Immutable."""

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[float]) -> None:
        array = np.array(values, dtype=float)
        array.setflags(write=False)
        self._values = array

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def max_age(self) -> int:
        return len(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PenetranceCurve):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        return f"PenetranceCurve(max_age={self.max_age}, total={self.total():.6g})"

    def at(self, age: int) -> float:
        """Probability of onset at `age` (0 outside 1..max_age)."""
        if 1 <= age <= self.max_age:
            return float(self._values[age - 1])
        return 0.0

    def total(self) -> float:
        return float(self._values.sum())

    def cumulative(self, age: int) -> float:
        """Sum of pen(s) for s = 1..age."""
        age = min(max(age, 0), self.max_age)
        return float(self._values[:age].sum())

    def survival(self) -> np.ndarray:
        """S(t) = 1 - sum_{s<=t} pen(s) for t = 0..max_age (S(0) = 1)."""
        return np.concatenate(([1.0], 1.0 - np.cumsum(self._values)))

    def hazards(self) -> np.ndarray:
        """Discrete hazards pen(t) / S(t-1); zero where no survival mass remains."""
        before = self.survival()[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            hazards = np.where(before > 0, self._values / np.where(before > 0, before, 1.0), 0.0)
        return hazards

    @classmethod
    def from_hazards(cls, hazards: np.ndarray) -> "PenetranceCurve":
        survival = np.concatenate(([1.0], np.cumprod(1.0 - np.asarray(hazards, dtype=float))))
        return cls(survival[:-1] - survival[1:])

    @classmethod
    def zeros(cls, max_age: int) -> "PenetranceCurve":
        return cls(np.zeros(max_age))


class GeneSpec(NamedTuple):
    gene_id: str
    state_count: int
    allele_frequency: Dict[str, float]


class MarkerClass(NamedTuple):
    genes: Tuple[str, ...]
    sensitivity: float


class MarkerSpec(NamedTuple):
    """Tumor marker: P(positive | carrier class) = sensitivity, P(negative | no class) = specificity."""
    marker_id: str
    cancer_id: str
    classes: Tuple[MarkerClass, ...]
    specificity: float


class InterventionEffect(NamedTuple):
    intervention_id: str
    cancer_id: str
    kind: EffectKind
    value: float


class SecondarySpec(NamedTuple):
    """Secondary cancer following a primary; curves indexed by elapsed years 0..max_age-1."""
    primary: str
    secondary: str
    noncarrier: Dict[Sex, PenetranceCurve]
    carrier: Dict[Tuple[str, int, Sex], PenetranceCurve]


@dataclass(frozen=True)
class ParameterDB:
    max_age: int
    default_ancestry: str
    genes: Tuple[GeneSpec, ...]
    cancers: Tuple[str, ...]
    carrier_penetrance: Dict[Tuple[str, int, str, Sex], PenetranceCurve]
    population_rate: Dict[Tuple[str, Sex, str], PenetranceCurve]
    death_other_causes: Dict[Sex, PenetranceCurve]
    markers: Dict[str, MarkerSpec] = field(default_factory=dict)
    intervention_effects: Dict[Tuple[str, str], InterventionEffect] = field(default_factory=dict)
    secondary: Dict[str, SecondarySpec] = field(default_factory=dict)
    groups: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    max_carriers: int = 2
    clamp_tolerance: float = DEFAULT_CLAMP_TOLERANCE
    noncarrier_penetrance: Dict[Tuple[str, Sex, str], PenetranceCurve] = field(default_factory=dict)
    warnings: Tuple[str, ...] = ()

    @property
    def gene_ids(self) -> Tuple[str, ...]:
        return tuple(gene.gene_id for gene in self.genes)

    def gene_index(self, gene_id: str) -> int:
        try:
            return self.gene_ids.index(gene_id)
        except ValueError:
            raise ParameterError(f"Unknown gene {gene_id}")

    def carrier(self, gene_id: str, state: int, cancer_id: str, sex: Sex) -> Optional[PenetranceCurve]:
        """Carrier curve or None when the gene state has no association with the cancer."""
        return self.carrier_penetrance.get((gene_id, state, cancer_id, sex))

    def noncarrier(self, cancer_id: str, sex: Sex, ancestry: str) -> PenetranceCurve:
        try:
            return self.noncarrier_penetrance[(cancer_id, sex, ancestry)]
        except KeyError:
            raise ParameterError(f"Missing population rate for cancer {cancer_id}, sex {sex.value}, "
                                 f"ancestry {ancestry}")

    def death(self, sex: Sex) -> PenetranceCurve:
        try:
            return self.death_other_causes[sex]
        except KeyError:
            raise ParameterError(f"Missing death-by-other-causes distribution for sex {sex.value}")

    def ancestries(self) -> Tuple[str, ...]:
        return tuple(sorted({key[2] for key in self.population_rate}))


# -- multi-carrier combination ---------------------------------------------------------------------

def carried_factors(db: ParameterDB, states: Sequence[int], cancer_id: str, sex: Sex) -> List[PenetranceCurve]:
    """Carrier curves of every carried gene state associated with the cancer."""
    factors = []
    for gene, state in zip(db.genes, states):
        if state:
            curve = db.carrier(gene.gene_id, int(state), cancer_id, sex)
            if curve is not None:
                factors.append(curve)
    return factors


def combine_factors(factors: Sequence[PenetranceCurve],
                    rule: MultiCarrierRule = MultiCarrierRule.PRODUCT) -> PenetranceCurve:
    """Single curve for a multi-carrier.

    PRODUCT multiplies survivals, S(t) = prod_k S_k(t); MAX keeps the factor with the
    largest lifetime risk.
    """
    if len(factors) == 1:
        return factors[0]
    if rule == MultiCarrierRule.MAX:
        return max(factors, key=lambda curve: curve.total())
    survival = np.prod([curve.survival() for curve in factors], axis=0)
    return PenetranceCurve(survival[:-1] - survival[1:])


# -- derived quantities ----------------------------------------------------------------------------

def carrier_mixture(db: ParameterDB, cancer_id: str, sex: Sex, ancestry: str,
                    space_cap: int = 10 ** 6) -> Tuple[np.ndarray, float]:
    """Carrier part of the population curve and the prior mass left for the noncarrier curve.

    Weights are the pared founder prior renormalized over the pared space.
    """
    from panelmendel.engine.genotype import enumerate_pared, founder_prior

    space = enumerate_pared(db.genes, db.max_carriers, cap=space_cap)
    prior = founder_prior(space, ancestry)
    weights = prior / prior.sum()

    noncarrier_mass = 0.0
    mixed = np.zeros(db.max_age)
    for index in range(space.size):
        factors = carried_factors(db, space.states[index], cancer_id, sex)
        if factors:
            mixed += weights[index] * combine_factors(factors).values
        else:
            noncarrier_mass += weights[index]
    if noncarrier_mass <= 0:
        raise ParameterError(f"No noncarrier mass for cancer {cancer_id}, sex {sex.value}, ancestry {ancestry}")
    return mixed, float(noncarrier_mass)


def derive_noncarrier_penetrance(db: ParameterDB, cancer_id: str, sex: Sex, ancestry: str,
                                 warnings: Optional[DiagnosticLog] = None,
                                 space_cap: int = 10 ** 6) -> PenetranceCurve:
    """Solve sum_g P(g) pen(t|g) = population(t) for the noncarrier curve.

    Genotypes whose carried genes have no association with the cancer share the
    noncarrier curve. Negative solutions are clamped to 0; clamps deeper than the
    tolerance raise a ValidationError listing the ages.
    """
    population = db.population_rate.get((cancer_id, sex, ancestry))
    if population is None:
        raise ParameterError(f"Missing population rate for cancer {cancer_id}, sex {sex.value}, "
                             f"ancestry {ancestry}")

    mixed, noncarrier_mass = carrier_mixture(db, cancer_id, sex, ancestry, space_cap)

    solution = (population.values - mixed) / noncarrier_mass
    path = f"/populationRate/{cancer_id}/{sex.value}/{ancestry}"
    deficit = np.where(solution < 0, -solution, 0.0)
    excess = np.where(solution > 1, solution - 1, 0.0)
    adjustment = np.maximum(deficit, excess)
    bad_ages = [int(age) for age in np.nonzero(adjustment > db.clamp_tolerance)[0] + 1]
    if bad_ages:
        raise ValidationError(f"Population rate inconsistent with carrier penetrances at ages {bad_ages}",
                              path=path, ages=bad_ages)
    clamped_ages = [int(age) for age in np.nonzero(adjustment > 0)[0] + 1]
    if clamped_ages:
        message = (f"Noncarrier penetrance for {cancer_id}/{sex.value}/{ancestry} clamped to [0, 1] "
                   f"at ages {clamped_ages}")
        if warnings is not None:
            warnings.warn(message)
        else:
            logger.warning(message)
    solution = np.clip(solution, 0.0, 1.0)
    if solution.sum() > 1 + _MASS_SLACK:
        raise ValidationError(f"Derived noncarrier penetrance for {cancer_id} exceeds total mass 1", path=path)
    return PenetranceCurve(solution)


def net_to_crude(net: PenetranceCurve, death: PenetranceCurve,
                 warnings: Optional[DiagnosticLog] = None) -> PenetranceCurve:
    """Crude penetrance with death by other causes as an independent competing risk.

    crude(t) = lambda_net(t) * prod_{s<t}(1 - lambda_net(s)) * prod_{s<t}(1 - lambda_death(s))
    """
    if net.max_age != death.max_age:
        raise ParameterError(f"Curves have different age grids ({net.max_age} vs {death.max_age})")
    net_before = net.survival()[:-1]
    alive_before = np.concatenate(([1.0], np.cumprod(1.0 - death.hazards())))[:-1]
    undefined = (net_before <= 0) & (net.values > 0)
    if undefined.any():
        first = int(np.argmax(undefined)) + 1
        message = f"Net survival exhausted before age {first}; remaining crude mass truncated"
        if warnings is not None:
            warnings.warn(message)
        else:
            logger.warning(message)
    hazards = net.hazards()
    crude = np.where(undefined, 0.0, hazards * np.clip(net_before, 0.0, 1.0) * alive_before)
    return PenetranceCurve(crude)


# -- loading and validation ------------------------------------------------------------------------

def _check(condition: bool, message: str, path: str) -> None:
    if not condition:
        raise ValidationError(message, path=path)


def _probability(value: Any, path: str) -> float:
    _check(isinstance(value, (int, float)) and not isinstance(value, bool), "Expected a number", path)
    _check(0.0 <= value <= 1.0, f"Probability {value} outside [0, 1]", path)
    return float(value)


def _sex(value: Any, path: str) -> Sex:
    try:
        return Sex(value)
    except ValueError:
        raise ValidationError(f"Unknown sex {value!r}", path=path)


def _curve(values: Any, max_age: int, path: str) -> PenetranceCurve:
    _check(isinstance(values, list), "Expected an array of probabilities", path)
    _check(len(values) == max_age, f"Expected {max_age} values, got {len(values)}", path)
    for index, value in enumerate(values):
        _probability(value, f"{path}/{index}")
    curve = PenetranceCurve(values)
    _check(curve.total() <= 1 + _MASS_SLACK, f"Curve mass {curve.total()} exceeds 1", path)
    return curve


def _known(value: Any, known: Sequence[str], what: str, path: str) -> str:
    _check(value in known, f"Undeclared {what} {value!r}", path)
    return value


def parse_parameter_db(doc: Dict[str, Any], max_carriers: int = 2,
                       clamp_tolerance: float = DEFAULT_CLAMP_TOLERANCE,
                       space_cap: int = 10 ** 6, default_max_age: int = DEFAULT_MAX_AGE) -> ParameterDB:
    """Validate a parameter document and derive the noncarrier penetrances."""
    _check(isinstance(doc, dict), "Expected a JSON object", "")
    max_age = doc.get("maxAge", default_max_age)
    _check(isinstance(max_age, int) and max_age >= 1, "maxAge must be a positive integer", "/maxAge")
    default_ancestry = doc.get("defaultAncestry", "All")
    _check(isinstance(default_ancestry, str), "defaultAncestry must be a string", "/defaultAncestry")

    # Genes
    genes: List[GeneSpec] = []
    for i, gene in enumerate(doc.get("genes", [])):
        path = f"/genes/{i}"
        _check(isinstance(gene, dict) and isinstance(gene.get("id"), str), "Gene requires an id", path)
        _check(gene["id"] not in [g.gene_id for g in genes], f"Duplicate gene {gene['id']}", f"{path}/id")
        states = gene.get("states", 2)
        _check(states in (2, 3), "states must be 2 or 3", f"{path}/states")
        frequencies = gene.get("alleleFrequency")
        _check(isinstance(frequencies, dict) and frequencies, "alleleFrequency must map ancestry to frequency",
               f"{path}/alleleFrequency")
        frequencies = {ancestry: _probability(value, f"{path}/alleleFrequency/{ancestry}")
                       for ancestry, value in frequencies.items()}
        genes.append(GeneSpec(gene["id"], states, frequencies))
    gene_ids = [gene.gene_id for gene in genes]
    state_counts = {gene.gene_id: gene.state_count for gene in genes}

    # Cancers
    cancers = doc.get("cancers", [])
    _check(isinstance(cancers, list) and all(isinstance(c, str) for c in cancers),
           "cancers must be a list of identifiers", "/cancers")
    _check(len(set(cancers)) == len(cancers), "Duplicate cancer identifiers", "/cancers")

    carrier_penetrance: Dict[Tuple[str, int, str, Sex], PenetranceCurve] = {}
    for i, entry in enumerate(doc.get("carrierPenetrance", [])):
        path = f"/carrierPenetrance/{i}"
        gene_id = _known(entry.get("gene"), gene_ids, "gene", f"{path}/gene")
        cancer_id = _known(entry.get("cancer"), cancers, "cancer", f"{path}/cancer")
        state = entry.get("state", 1)
        _check(isinstance(state, int) and 1 <= state < state_counts[gene_id],
               f"State {state} invalid for gene {gene_id}", f"{path}/state")
        sex = _sex(entry.get("sex"), f"{path}/sex")
        key = (gene_id, state, cancer_id, sex)
        _check(key not in carrier_penetrance, "Duplicate carrier penetrance", path)
        carrier_penetrance[key] = _curve(entry.get("values"), max_age, f"{path}/values")

    population_rate: Dict[Tuple[str, Sex, str], PenetranceCurve] = {}
    for i, entry in enumerate(doc.get("populationRate", [])):
        path = f"/populationRate/{i}"
        cancer_id = _known(entry.get("cancer"), cancers, "cancer", f"{path}/cancer")
        sex = _sex(entry.get("sex"), f"{path}/sex")
        ancestry = entry.get("ancestry", default_ancestry)
        for gene in genes:
            _check(ancestry in gene.allele_frequency,
                   f"Gene {gene.gene_id} has no allele frequency for ancestry {ancestry}", f"{path}/ancestry")
        population_rate[(cancer_id, sex, ancestry)] = _curve(entry.get("values"), max_age, f"{path}/values")

    death: Dict[Sex, PenetranceCurve] = {}
    for sex_name, values in doc.get("deathOtherCauses", {}).items():
        path = f"/deathOtherCauses/{sex_name}"
        death[_sex(sex_name, path)] = _curve(values, max_age, path)

    markers: Dict[str, MarkerSpec] = {}
    for marker_id, entry in doc.get("markers", {}).items():
        path = f"/markers/{marker_id}"
        cancer_id = _known(entry.get("cancer"), cancers, "cancer", f"{path}/cancer")
        classes = []
        for j, marker_class in enumerate(entry.get("classes", [])):
            class_path = f"{path}/classes/{j}"
            class_genes = tuple(_known(gene_id, gene_ids, "gene", f"{class_path}/genes")
                                for gene_id in marker_class.get("genes", []))
            classes.append(MarkerClass(class_genes,
                                       _probability(marker_class.get("sensitivity"), f"{class_path}/sensitivity")))
        specificity = _probability(entry.get("specificity"), f"{path}/specificity")
        markers[marker_id] = MarkerSpec(marker_id, cancer_id, tuple(classes), specificity)

    interventions: Dict[Tuple[str, str], InterventionEffect] = {}
    for i, entry in enumerate(doc.get("interventions", [])):
        path = f"/interventions/{i}"
        _check(isinstance(entry.get("id"), str), "Intervention requires an id", f"{path}/id")
        cancer_id = _known(entry.get("cancer"), cancers, "cancer", f"{path}/cancer")
        try:
            kind = EffectKind(entry.get("kind"))
        except ValueError:
            raise ValidationError(f"Unknown effect kind {entry.get('kind')!r}", path=f"{path}/kind")
        value = entry.get("value")
        _check(isinstance(value, (int, float)) and value >= 0, "Effect value must be >= 0", f"{path}/value")
        interventions[(entry["id"], cancer_id)] = InterventionEffect(entry["id"], cancer_id, kind, float(value))

    secondary: Dict[str, SecondarySpec] = {}
    for i, entry in enumerate(doc.get("secondaryCancers", [])):
        path = f"/secondaryCancers/{i}"
        primary = _known(entry.get("primary"), cancers, "cancer", f"{path}/primary")
        secondary_id = entry.get("secondary")
        _check(isinstance(secondary_id, str) and secondary_id not in cancers,
               "Secondary cancer id must be new", f"{path}/secondary")
        _check(primary not in secondary, f"Only one secondary cancer per primary ({primary})", path)
        noncarrier = {_sex(sex_name, f"{path}/noncarrier/{sex_name}"):
                      _curve(values, max_age, f"{path}/noncarrier/{sex_name}")
                      for sex_name, values in entry.get("noncarrier", {}).items()}
        carrier = {}
        for j, curve_entry in enumerate(entry.get("carrier", [])):
            curve_path = f"{path}/carrier/{j}"
            gene_id = _known(curve_entry.get("gene"), gene_ids, "gene", f"{curve_path}/gene")
            state = curve_entry.get("state", 1)
            _check(isinstance(state, int) and 1 <= state < state_counts[gene_id],
                   f"State {state} invalid for gene {gene_id}", f"{curve_path}/state")
            sex = _sex(curve_entry.get("sex"), f"{curve_path}/sex")
            carrier[(gene_id, state, sex)] = _curve(curve_entry.get("values"), max_age, f"{curve_path}/values")
        secondary[primary] = SecondarySpec(primary, secondary_id, noncarrier, carrier)

    groups = {}
    for name, members in doc.get("groups", {}).items():
        groups[name] = tuple(_known(gene_id, gene_ids, "gene", f"/groups/{name}") for gene_id in members)

    db = ParameterDB(max_age=max_age, default_ancestry=default_ancestry, genes=tuple(genes),
                     cancers=tuple(cancers), carrier_penetrance=carrier_penetrance,
                     population_rate=population_rate, death_other_causes=death, markers=markers,
                     intervention_effects=interventions, secondary=secondary, groups=groups,
                     max_carriers=max_carriers, clamp_tolerance=clamp_tolerance)

    # Derived noncarrier penetrances
    log = DiagnosticLog(logger)
    noncarrier = {}
    for cancer_id, sex, ancestry in sorted(population_rate, key=lambda key: (key[0], key[1].value, key[2])):
        noncarrier[(cancer_id, sex, ancestry)] = derive_noncarrier_penetrance(db, cancer_id, sex, ancestry,
                                                                              warnings=log, space_cap=space_cap)
    object.__setattr__(db, "noncarrier_penetrance", noncarrier)
    object.__setattr__(db, "warnings", tuple(log))
    return db


def load_parameter_db(path: str, max_carriers: int = 2, clamp_tolerance: float = DEFAULT_CLAMP_TOLERANCE,
                      space_cap: int = 10 ** 6, default_max_age: int = DEFAULT_MAX_AGE) -> ParameterDB:
    try:
        with open(path, mode="r") as input:
            doc = json.load(input)
    except json.JSONDecodeError as e:
        raise ValidationError(f"Cannot parse parameter database: {e.msg} (line {e.lineno})")
    except OSError as e:
        raise ParameterError(f"Cannot read parameter database {path}: {e.strerror}")
    db = parse_parameter_db(doc, max_carriers=max_carriers, clamp_tolerance=clamp_tolerance, space_cap=space_cap,
                            default_max_age=default_max_age)
    logger.info(f"Loaded parameter database {path}: {len(db.genes)} genes, {len(db.cancers)} cancers")
    return db


def dump_parameter_db(db: ParameterDB) -> Dict[str, Any]:
    """Serialize to the documented JSON schema (derived curves are not stored)."""
    def values(curve: PenetranceCurve) -> List[float]:
        return [float(v) for v in curve.values]

    return {
        "maxAge": db.max_age,
        "defaultAncestry": db.default_ancestry,
        "genes": [{"id": gene.gene_id, "states": gene.state_count, "alleleFrequency": dict(gene.allele_frequency)}
                  for gene in db.genes],
        "cancers": list(db.cancers),
        "carrierPenetrance": [{"gene": gene_id, "state": state, "cancer": cancer_id, "sex": sex.value,
                               "values": values(curve)}
                              for (gene_id, state, cancer_id, sex), curve in db.carrier_penetrance.items()],
        "populationRate": [{"cancer": cancer_id, "sex": sex.value, "ancestry": ancestry, "values": values(curve)}
                           for (cancer_id, sex, ancestry), curve in db.population_rate.items()],
        "deathOtherCauses": {sex.value: values(curve) for sex, curve in db.death_other_causes.items()},
        "markers": {marker.marker_id: {"cancer": marker.cancer_id,
                                       "classes": [{"genes": list(c.genes), "sensitivity": c.sensitivity}
                                                   for c in marker.classes],
                                       "specificity": marker.specificity}
                    for marker in db.markers.values()},
        "interventions": [{"id": effect.intervention_id, "cancer": effect.cancer_id, "kind": effect.kind.value,
                           "value": effect.value} for effect in db.intervention_effects.values()],
        "secondaryCancers": [{"primary": entry.primary, "secondary": entry.secondary,
                              "noncarrier": {sex.value: values(curve) for sex, curve in entry.noncarrier.items()},
                              "carrier": [{"gene": gene_id, "state": state, "sex": sex.value, "values": values(curve)}
                                          for (gene_id, state, sex), curve in entry.carrier.items()]}
                             for entry in db.secondary.values()],
        "groups": {name: list(members) for name, members in db.groups.items()},
    }


def _reparse(db: ParameterDB, doc: Dict[str, Any]) -> ParameterDB:
    return parse_parameter_db(doc, max_carriers=db.max_carriers, clamp_tolerance=db.clamp_tolerance)


def with_allele_frequencies(db: ParameterDB, frequencies: Dict[str, float]) -> ParameterDB:
    """Override allele frequencies (all ancestries) of the named genes."""
    doc = dump_parameter_db(db)
    for gene in doc["genes"]:
        if gene["id"] in frequencies:
            gene["alleleFrequency"] = {ancestry: frequencies[gene["id"]] for ancestry in gene["alleleFrequency"]}
    return _reparse(db, doc)


def restrict_genes(db: ParameterDB, gene_ids: Sequence[str]) -> ParameterDB:
    """Submodel containing only the listed genes."""
    keep = set(gene_ids)
    doc = dump_parameter_db(db)
    doc["genes"] = [gene for gene in doc["genes"] if gene["id"] in keep]
    doc["carrierPenetrance"] = [entry for entry in doc["carrierPenetrance"] if entry["gene"] in keep]
    for marker in doc["markers"].values():
        marker["classes"] = [dict(c, genes=[g for g in c["genes"] if g in keep])
                             for c in marker["classes"] if any(g in keep for g in c["genes"])]
    for secondary in doc["secondaryCancers"]:
        secondary["carrier"] = [entry for entry in secondary["carrier"] if entry["gene"] in keep]
    doc["groups"] = {name: [g for g in members if g in keep] for name, members in doc["groups"].items()}
    doc["groups"] = {name: members for name, members in doc["groups"].items() if members}
    return _reparse(db, doc)


def restrict_cancers(db: ParameterDB, cancer_ids: Sequence[str]) -> ParameterDB:
    """Submodel containing only the listed cancers (and their secondary cancers)."""
    keep = set(cancer_ids)
    doc = dump_parameter_db(db)
    doc["cancers"] = [cancer for cancer in doc["cancers"] if cancer in keep]
    for section in ("carrierPenetrance", "populationRate", "interventions"):
        doc[section] = [entry for entry in doc[section] if entry["cancer"] in keep]
    doc["markers"] = {marker_id: marker for marker_id, marker in doc["markers"].items() if marker["cancer"] in keep}
    doc["secondaryCancers"] = [secondary for secondary in doc["secondaryCancers"] if secondary["primary"] in keep]
    return _reparse(db, doc)


def without_associations(db: ParameterDB, cancer_ids: Sequence[str]) -> ParameterDB:
    """Drop carrier curves of the listed cancers so every genotype uses the noncarrier curve."""
    drop = set(cancer_ids)
    doc = copy.deepcopy(dump_parameter_db(db))
    doc["carrierPenetrance"] = [entry for entry in doc["carrierPenetrance"] if entry["cancer"] not in drop]
    for secondary in doc["secondaryCancers"]:
        if secondary["primary"] in drop:
            secondary["carrier"] = []
    return _reparse(db, doc)


# -- synthetic databases ---------------------------------------------------------------------------

def _ramp(max_age: int, onset: int, low: float, high: float, plateau: int) -> List[float]:
    """Zero before onset, linear from low to high until plateau, flat afterwards."""
    values = []
    for age in range(1, max_age + 1):
        if age < onset:
            values.append(0.0)
        elif age < plateau:
            values.append(low + (high - low) * (age - onset) / max(plateau - onset, 1))
        else:
            values.append(high)
    return values


def synthetic_db(gene_count: int, cancer_count: int = 2, allele_frequency: float = 0.01,
                 max_age: int = DEFAULT_MAX_AGE, max_carriers: int = 2, three_state: Sequence[int] = (),
                 ancestry: str = "All") -> ParameterDB:
    """Generated parameter database for benchmarks and tests.

    Gene k is associated with cancers k mod R and (k + 1) mod R. Population rates are
    built forward from a fixed noncarrier baseline and the carrier mixture, so they
    are consistent with the carrier curves for any allele frequency.
    """
    cancers = [f"cancer{r + 1}" for r in range(cancer_count)]
    genes = [{"id": f"GENE{k + 1}", "states": 3 if k in three_state else 2,
              "alleleFrequency": {ancestry: allele_frequency}} for k in range(gene_count)]
    carrier = []
    for k in range(gene_count):
        associated = sorted({k % cancer_count, (k + 1) % cancer_count})
        for r in associated:
            for sex in Sex:
                carrier.append({"gene": f"GENE{k + 1}", "state": 1, "cancer": cancers[r], "sex": sex.value,
                                "values": _ramp(max_age, 25, 0.002, 0.008, 50)})
                if k in three_state:
                    carrier.append({"gene": f"GENE{k + 1}", "state": 2, "cancer": cancers[r], "sex": sex.value,
                                    "values": _ramp(max_age, 15, 0.006, 0.012, 40)})
    death = {sex.value: _ramp(max_age, 1, 0.0005, 0.01, max_age) for sex in Sex}
    doc = {"maxAge": max_age, "defaultAncestry": ancestry, "genes": genes, "cancers": cancers,
           "carrierPenetrance": carrier, "populationRate": [], "deathOtherCauses": death,
           "groups": {}}
    carriers_only = parse_parameter_db(doc, max_carriers=max_carriers)

    baseline = np.array(_ramp(max_age, 20, 0.0002, 0.002, 70))
    for cancer_id in cancers:
        for sex in Sex:
            mixed, noncarrier_mass = carrier_mixture(carriers_only, cancer_id, sex, ancestry)
            doc["populationRate"].append({"cancer": cancer_id, "sex": sex.value, "ancestry": ancestry,
                                          "values": (noncarrier_mass * baseline + mixed).tolist()})
    return parse_parameter_db(doc, max_carriers=max_carriers)
