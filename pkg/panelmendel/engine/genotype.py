import itertools
import logging
import threading
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from panelmendel.engine.errors import CapacityError, InputError, ParameterError
from panelmendel.engine.params import GeneSpec

logger = logging.getLogger(__name__)


def pared_size(genes: Sequence[GeneSpec], max_carriers: int) -> int:
    """Number of genotypes with at most `max_carriers` nonzero genes.

    Elementary symmetric sums of (stateCount - 1) over the genes.
    """
    sums = [1] + [0] * len(genes)
    for gene in genes:
        for m in range(len(genes), 0, -1):
            sums[m] += sums[m - 1] * (gene.state_count - 1)
    return sum(sums[:max(min(max_carriers, len(genes)), 0) + 1])


def unpared_size(genes: Sequence[GeneSpec]) -> int:
    return int(np.prod([gene.state_count for gene in genes], dtype=object)) if genes else 1


class ParedGenotypeSpace:
    """Dense enumeration of the pared genotype space.

    Genotypes are ordered by carrier count, then by carried gene positions, then by
    states. Index 0 is the all-zero genotype.
    """

    def __init__(self, genes: Sequence[GeneSpec], max_carriers: int, states: np.ndarray) -> None:
        self.genes = tuple(genes)
        self.max_carriers = max_carriers
        self.states = states
        self.states.setflags(write=False)
        self.index_of: Dict[Tuple[int, ...], int] = {tuple(int(s) for s in row): i for i, row in enumerate(states)}
        self._transmission: Optional[np.ndarray] = None
        self._lock = threading.Lock()

    @property
    def gene_count(self) -> int:
        return len(self.genes)

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def __len__(self) -> int:
        return self.size

    def carrier_mask(self, gene_index: int) -> np.ndarray:
        return self.states[:, gene_index] != 0

    def carrier_counts(self) -> np.ndarray:
        return np.count_nonzero(self.states, axis=1)

    def transmission(self, cap: int = 16 * 10 ** 6) -> np.ndarray:
        """Dense T[child, mother, father], built on first use."""
        with self._lock:
            if self._transmission is None:
                self._transmission = transmission_tensor(self, cap=cap)
            return self._transmission


def enumerate_pared(genes: Sequence[GeneSpec], max_carriers: int, cap: int = 10 ** 6) -> ParedGenotypeSpace:
    if max_carriers < 0:
        raise InputError(f"Max carriers must be >= 0, got {max_carriers}")
    gene_count = len(genes)
    max_carriers = min(max_carriers, gene_count)
    size = pared_size(genes, max_carriers)
    if size > cap:
        raise CapacityError(f"Pared genotype space has {size} genotypes (cap {cap})")

    states = np.zeros((size, gene_count), dtype=np.int8)
    row = 0
    for carriers in range(max_carriers + 1):
        for positions in itertools.combinations(range(gene_count), carriers):
            for values in itertools.product(*[range(1, genes[k].state_count) for k in positions]):
                states[row, list(positions)] = values
                row += 1
    logger.debug(f"Enumerated {size} genotypes for K={gene_count}, M={max_carriers}")
    return ParedGenotypeSpace(genes, max_carriers, states)


def hardy_weinberg(state_count: int, frequency: float) -> np.ndarray:
    """Per-gene founder marginal indexed by state."""
    noncarrier = (1.0 - frequency) ** 2
    if state_count == 3:
        return np.array([noncarrier, 2.0 * frequency * (1.0 - frequency), frequency ** 2])
    return np.array([noncarrier, 1.0 - noncarrier])


def founder_prior(space: ParedGenotypeSpace, ancestry: str) -> np.ndarray:
    """Hardy-Weinberg product over genes, restricted to the pared space without renormalization."""
    prior = np.ones(space.size)
    for k, gene in enumerate(space.genes):
        if ancestry not in gene.allele_frequency:
            raise ParameterError(f"Missing allele frequency of {gene.gene_id} for ancestry {ancestry}")
        prior *= hardy_weinberg(gene.state_count, gene.allele_frequency[ancestry])[space.states[:, k]]
    return prior


def gene_transmission(state_count: int) -> np.ndarray:
    """Table t[child, mother, father] for a single gene.

    A parent in state s transmits the variant with probability s / 2; a 2-state
    carrier counts as heterozygous and the 2-state child carries when either
    parent transmits.
    """
    table = np.zeros((state_count, state_count, state_count))
    for mother in range(state_count):
        for father in range(state_count):
            pm, pf = min(mother, 2) / 2.0, min(father, 2) / 2.0
            if state_count == 3:
                table[0, mother, father] = (1 - pm) * (1 - pf)
                table[1, mother, father] = pm * (1 - pf) + (1 - pm) * pf
                table[2, mother, father] = pm * pf
            else:
                table[0, mother, father] = (1 - pm) * (1 - pf)
                table[1, mother, father] = 1 - (1 - pm) * (1 - pf)
    return table


def transmission_prob(child: Sequence[int], mother: Sequence[int], father: Sequence[int],
                      space: ParedGenotypeSpace) -> float:
    probability = 1.0
    for k, gene in enumerate(space.genes):
        probability *= gene_transmission(gene.state_count)[child[k], mother[k], father[k]]
    return float(probability)


def transmission_tensor(space: ParedGenotypeSpace, cap: int = 16 * 10 ** 6) -> np.ndarray:
    size = space.size
    if size ** 3 > cap:
        raise CapacityError(f"Transmission tensor needs {size ** 3} cells (cap {cap})")
    tensor = np.ones((size, size, size))
    for k, gene in enumerate(space.genes):
        column = space.states[:, k].astype(np.intp)
        table = gene_transmission(gene.state_count)
        tensor *= table[column[:, None, None], column[None, :, None], column[None, None, :]]
    return tensor
