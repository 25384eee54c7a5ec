"""Elston-Stewart elimination over nuclear families on the pared genotype space.

Each person carries a vector over the space (likelihood, founder prior when the
person is a founder, messages from the families peeled into them). Families are
eliminated toward the counselee; every message is rescaled by its maximum and the
log of the factor is accumulated.

The counselee's genotype is clamped: for a founder counselee the prior factor is
left out, so the result is P(H | G1 = g) directly. For a non-founder counselee the
joint P(H, G1 = g) is divided by the marginal of the same pedigree with no
phenotypes.
"""

import logging
import math
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from panelmendel.engine.errors import CapacityError, ImpossibilityError
from panelmendel.engine.genotype import ParedGenotypeSpace, founder_prior
from panelmendel.engine.likelihood import ModifiedCurveCache, person_likelihood
from panelmendel.engine.model import DiagnosticLog, EngineOptions
from panelmendel.engine.params import ParameterDB
from panelmendel.engine.pedigree import NuclearFamily, Pedigree, nuclear_decomposition

logger = logging.getLogger(__name__)


class PeelResult(NamedTuple):
    """Vectors over the space; true values are vector * exp(log_scale)."""
    conditional: np.ndarray
    log_scale: float
    joint: np.ndarray
    joint_log_scale: float


def family_ancestry(pedigree: Pedigree, db: ParameterDB, override: Optional[str] = None) -> str:
    if override:
        return override
    return pedigree.counselee.ancestry or db.default_ancestry


def pedigree_likelihoods(pedigree: Pedigree, space: ParedGenotypeSpace, db: ParameterDB,
                         options: EngineOptions = EngineOptions(), ancestry: Optional[str] = None,
                         cache: Optional[ModifiedCurveCache] = None,
                         warnings: Optional[DiagnosticLog] = None) -> Dict[str, np.ndarray]:
    ancestry = family_ancestry(pedigree, db, ancestry)
    return {person.person_id: person_likelihood(person, space, db, options, ancestry, cache, warnings)
            for person in pedigree.members}


def _eliminate(pedigree: Pedigree, families: List[NuclearFamily], vectors: Dict[str, np.ndarray],
               transmission: Optional[np.ndarray]) -> Tuple[np.ndarray, float]:
    phi = dict(vectors)
    log_scale = 0.0
    for family in families:
        others = [child for child in family.children if child != family.pivot]
        mates = np.ones((transmission.shape[1], transmission.shape[2]))
        for child in others:
            mates *= np.tensordot(phi[child], transmission, axes=(0, 0))
        if family.pivot == family.mother:
            message = mates @ phi[family.father]
        elif family.pivot == family.father:
            message = phi[family.mother] @ mates
        else:
            weighted = mates * phi[family.mother][:, None] * phi[family.father][None, :]
            message = np.tensordot(transmission, weighted, axes=([1, 2], [0, 1]))
        updated = phi[family.pivot] * message
        scale = updated.max()
        if not scale > 0 or not math.isfinite(scale):
            raise ImpossibilityError(f"Family history {pedigree.family_id} impossible under model "
                                     f"(at the family of {family.mother} and {family.father})")
        phi[family.pivot] = updated / scale
        log_scale += math.log(scale)
    return phi[pedigree.counselee_id], log_scale


def _counselee_vectors(pedigree: Pedigree, likelihoods: Dict[str, np.ndarray], prior: np.ndarray,
                       with_counselee_prior: bool) -> Dict[str, np.ndarray]:
    vectors = {}
    for person in pedigree.members:
        vector = likelihoods[person.person_id]
        if person.is_founder and (with_counselee_prior or person.person_id != pedigree.counselee_id):
            vector = vector * prior
        vectors[person.person_id] = vector
    return vectors


def peel_paring(pedigree: Pedigree, space: ParedGenotypeSpace, db: ParameterDB,
                options: EngineOptions = EngineOptions(), ancestry: Optional[str] = None,
                cache: Optional[ModifiedCurveCache] = None, warnings: Optional[DiagnosticLog] = None,
                likelihoods: Optional[Dict[str, np.ndarray]] = None) -> PeelResult:
    """P(H | G1 = g) for every pared counselee genotype, up to exp(log_scale)."""
    families = nuclear_decomposition(pedigree)
    ancestry = family_ancestry(pedigree, db, ancestry)
    if likelihoods is None:
        likelihoods = pedigree_likelihoods(pedigree, space, db, options, ancestry, cache, warnings)
    prior = founder_prior(space, ancestry)
    transmission = space.transmission(options.transmission_cap) if families else None
    counselee = pedigree.counselee

    if counselee.is_founder:
        conditional, log_scale = _eliminate(pedigree, families,
                                            _counselee_vectors(pedigree, likelihoods, prior, False), transmission)
        if not conditional.any():
            raise ImpossibilityError(f"Family history {pedigree.family_id} impossible under model")
        joint = conditional * prior
        joint_scale = joint.max()
        if not joint_scale > 0:
            raise ImpossibilityError(f"Family history {pedigree.family_id} impossible under model")
        return PeelResult(conditional, log_scale, joint / joint_scale, log_scale + math.log(joint_scale))

    joint, joint_log_scale = _eliminate(pedigree, families,
                                        _counselee_vectors(pedigree, likelihoods, prior, True), transmission)
    if not joint.any():
        raise ImpossibilityError(f"Family history {pedigree.family_id} impossible under model")
    ones = {pid: np.ones(space.size) for pid in likelihoods}
    marginal, marginal_log_scale = _eliminate(pedigree, families,
                                              _counselee_vectors(pedigree, ones, prior, True), transmission)
    conditional = _divide(joint, marginal)
    return PeelResult(conditional, joint_log_scale - marginal_log_scale, joint, joint_log_scale)


def _divide(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denominator > 0, numerator / np.where(denominator > 0, denominator, 1.0), 0.0)


def brute_force_conditional(pedigree: Pedigree, space: ParedGenotypeSpace, db: ParameterDB,
                            options: EngineOptions = EngineOptions(), ancestry: Optional[str] = None,
                            cache: Optional[ModifiedCurveCache] = None, warnings: Optional[DiagnosticLog] = None,
                            likelihoods: Optional[Dict[str, np.ndarray]] = None) -> PeelResult:
    """Same contract as peel_paring by direct summation over every relative's genotype."""
    size = space.size
    relatives = len(pedigree.members) - 1
    if size ** relatives > options.brute_force_cap:
        raise CapacityError(f"Brute force needs {size ** relatives} summands (cap {options.brute_force_cap})")
    ancestry = family_ancestry(pedigree, db, ancestry)
    if likelihoods is None:
        likelihoods = pedigree_likelihoods(pedigree, space, db, options, ancestry, cache, warnings)
    prior = founder_prior(space, ancestry)
    order = [pedigree.counselee_id] + sorted(p.person_id for p in pedigree.members
                                             if p.person_id != pedigree.counselee_id)
    axis = {pid: i for i, pid in enumerate(order)}
    transmission = space.transmission(options.transmission_cap) if any(
        not p.is_founder for p in pedigree.members) else None

    def summation(with_phenotypes: bool, with_counselee_prior: bool) -> np.ndarray:
        operands = []
        for person in pedigree.members:
            i = axis[person.person_id]
            if with_phenotypes:
                operands += [likelihoods[person.person_id], [i]]
            if person.is_founder:
                if with_counselee_prior or i != 0:
                    operands += [prior, [i]]
            else:
                operands += [transmission, [i, axis[person.mother_id], axis[person.father_id]]]
        if not operands:
            return np.ones(size)
        return np.einsum(*operands, [0], optimize=False)

    counselee = pedigree.counselee
    if counselee.is_founder:
        conditional = summation(True, False)
        joint = conditional * prior
    else:
        joint = summation(True, True)
        conditional = _divide(joint, summation(False, True))
    if not joint.any():
        raise ImpossibilityError(f"Family history {pedigree.family_id} impossible under model")
    return PeelResult(conditional, 0.0, joint, 0.0)
