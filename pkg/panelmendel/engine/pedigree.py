import logging
from typing import Dict, List, NamedTuple, Optional, Tuple

import networkx as nx

from panelmendel.engine.errors import InputError, StructuralError
from panelmendel.engine.model import GermlineResult, Sex

logger = logging.getLogger(__name__)


class CancerEntry(NamedTuple):
    cancer_id: str
    age: int


class MarkerResult(NamedTuple):
    marker_id: str
    positive: bool


class GermlineTest(NamedTuple):
    gene_id: str
    result: GermlineResult


class InterventionEntry(NamedTuple):
    intervention_id: str
    age: int


class Person(NamedTuple):
    person_id: str
    sex: Optional[Sex]
    censor_age: Optional[int]
    mother_id: Optional[str] = None
    father_id: Optional[str] = None
    deceased: bool = False
    ancestry: Optional[str] = None
    cancers: Tuple[CancerEntry, ...] = ()
    markers: Tuple[MarkerResult, ...] = ()
    germline: Tuple[GermlineTest, ...] = ()
    interventions: Tuple[InterventionEntry, ...] = ()

    @property
    def is_founder(self) -> bool:
        return self.mother_id is None and self.father_id is None

    def diagnosis_age(self, cancer_id: str) -> Optional[int]:
        for entry in self.cancers:
            if entry.cancer_id == cancer_id:
                return entry.age
        return None


class Pedigree(NamedTuple):
    members: Tuple[Person, ...]
    counselee_id: str
    family_id: str = ""

    def person(self, person_id: str) -> Person:
        for member in self.members:
            if member.person_id == person_id:
                return member
        raise KeyError(person_id)

    @property
    def counselee(self) -> Person:
        return self.person(self.counselee_id)

    def founders(self) -> List[Person]:
        return [member for member in self.members if member.is_founder]


class Diagnostic(NamedTuple):
    person_id: str
    rule: str

    def __str__(self) -> str:
        return f"{self.person_id}: {self.rule}"


class NuclearFamily(NamedTuple):
    """Mates and their children; `pivot` is the member connecting the family to the counselee."""
    mother: str
    father: str
    children: Tuple[str, ...]
    pivot: str


def _family_key(person: Person) -> Tuple[str, str, str]:
    return ("family", person.mother_id, person.father_id)


def family_graph(pedigree: Pedigree) -> nx.Graph:
    """Bipartite person-family graph. A pedigree without loops is a forest."""
    graph = nx.Graph()
    for person in sorted(pedigree.members, key=lambda p: p.person_id):
        graph.add_node(("person", person.person_id))
    for person in sorted(pedigree.members, key=lambda p: p.person_id):
        if person.mother_id is None or person.father_id is None:
            continue
        family = _family_key(person)
        graph.add_edge(("person", person.mother_id), family)
        graph.add_edge(("person", person.father_id), family)
        graph.add_edge(("person", person.person_id), family)
    return graph


def _loop_members(graph: nx.Graph) -> List[str]:
    members = set()
    for cycle in nx.cycle_basis(graph):
        members.update(node[1] for node in cycle if node[0] == "person")
    return sorted(members)


def validate_pedigree(pedigree: Pedigree, db=None, max_age: int = 94) -> List[Diagnostic]:
    """Check structure and phenotype consistency; an empty list means the pedigree is usable.

    With a parameter database the cancer, marker, gene and intervention
    identifiers are checked as well.
    """
    diagnostics: List[Diagnostic] = []
    if db is not None:
        max_age = db.max_age

    ids = [member.person_id for member in pedigree.members]
    by_id: Dict[str, Person] = {}
    for person in pedigree.members:
        if person.person_id in by_id:
            diagnostics.append(Diagnostic(person.person_id, "duplicate person id"))
        by_id[person.person_id] = person
    if pedigree.counselee_id not in by_id:
        diagnostics.append(Diagnostic(pedigree.counselee_id, "counselee not in pedigree"))

    for person in pedigree.members:
        pid = person.person_id
        # Relationships
        if (person.mother_id is None) != (person.father_id is None):
            diagnostics.append(Diagnostic(pid, "only one parent present"))
        for parent_id, expected, role in ((person.mother_id, Sex.FEMALE, "mother"),
                                          (person.father_id, Sex.MALE, "father")):
            if parent_id is None:
                continue
            if parent_id not in by_id:
                diagnostics.append(Diagnostic(pid, f"{role} {parent_id} not in pedigree"))
            elif by_id[parent_id].sex is not None and by_id[parent_id].sex != expected:
                diagnostics.append(Diagnostic(pid, f"{role} {parent_id} is not {expected.value}"))
        if person.mother_id is not None and person.mother_id == person.father_id:
            diagnostics.append(Diagnostic(pid, "same person as mother and father"))
        # Person fields
        if person.sex is None:
            diagnostics.append(Diagnostic(pid, "unknown sex"))
        if person.censor_age is None:
            diagnostics.append(Diagnostic(pid, "missing age"))
        elif not 1 <= person.censor_age <= max_age:
            diagnostics.append(Diagnostic(pid, f"censoring age {person.censor_age} outside 1..{max_age}"))
        # Phenotypes
        seen = set()
        for entry in person.cancers:
            if entry.cancer_id in seen:
                diagnostics.append(Diagnostic(pid, f"more than one diagnosis of {entry.cancer_id}"))
            seen.add(entry.cancer_id)
            if entry.age is None or entry.age < 1:
                diagnostics.append(Diagnostic(pid, f"missing or invalid age for {entry.cancer_id}"))
            elif person.censor_age is not None and entry.age > person.censor_age:
                diagnostics.append(Diagnostic(pid, "affection age exceeds censoring age"))
        for entry in person.interventions:
            if entry.age is None or not 1 <= entry.age <= max_age:
                diagnostics.append(Diagnostic(pid, f"invalid intervention age for {entry.intervention_id}"))
        if db is not None:
            diagnostics.extend(_check_vocabulary(person, db))

    # Graph structure, only when references resolve
    if any(d.rule.endswith("not in pedigree") or d.rule == "duplicate person id" for d in diagnostics):
        return diagnostics
    ancestry = nx.DiGraph()
    ancestry.add_nodes_from(ids)
    for person in pedigree.members:
        for parent_id in (person.mother_id, person.father_id):
            if parent_id is not None:
                ancestry.add_edge(parent_id, person.person_id)
    if not nx.is_directed_acyclic_graph(ancestry):
        for cycle in nx.simple_cycles(ancestry):
            for pid in sorted(cycle):
                diagnostics.append(Diagnostic(pid, "person is their own ancestor"))
            break
        return diagnostics

    graph = family_graph(pedigree)
    for pid in _loop_members(graph):
        diagnostics.append(Diagnostic(pid, "pedigree loop"))
    if pedigree.counselee_id in by_id:
        reachable = nx.node_connected_component(graph, ("person", pedigree.counselee_id))
        for pid in sorted(ids):
            if ("person", pid) not in reachable:
                diagnostics.append(Diagnostic(pid, "unreachable member"))
    return diagnostics


def _check_vocabulary(person: Person, db) -> List[Diagnostic]:
    diagnostics = []
    secondary = {link.secondary: link.primary for link in db.secondary.values()}
    for entry in person.cancers:
        if entry.cancer_id in secondary:
            primary_age = person.diagnosis_age(secondary[entry.cancer_id])
            if primary_age is None:
                diagnostics.append(Diagnostic(person.person_id,
                                              f"{entry.cancer_id} recorded without {secondary[entry.cancer_id]}"))
            elif entry.age is not None and entry.age < primary_age:
                diagnostics.append(Diagnostic(person.person_id, f"{entry.cancer_id} diagnosed before its primary"))
        elif entry.cancer_id not in db.cancers:
            diagnostics.append(Diagnostic(person.person_id, f"unknown cancer {entry.cancer_id}"))
    for result in person.markers:
        if result.marker_id not in db.markers:
            diagnostics.append(Diagnostic(person.person_id, f"unknown marker {result.marker_id}"))
    for test in person.germline:
        if test.gene_id not in db.gene_ids:
            diagnostics.append(Diagnostic(person.person_id, f"unknown gene {test.gene_id}"))
    known = {key[0] for key in db.intervention_effects}
    for entry in person.interventions:
        if entry.intervention_id not in known:
            diagnostics.append(Diagnostic(person.person_id, f"unknown intervention {entry.intervention_id}"))
    return diagnostics


def nuclear_decomposition(pedigree: Pedigree) -> List[NuclearFamily]:
    """Nuclear families in elimination order toward the counselee.

    Every family appears after all families attached to its non-pivot members.
    Ties are broken by person id, so the order is deterministic.
    """
    graph = family_graph(pedigree)
    loop = _loop_members(graph)
    if loop:
        raise StructuralError(f"Pedigree loop through {', '.join(loop)}",
                              diagnostics=[Diagnostic(pid, "pedigree loop") for pid in loop])
    root = ("person", pedigree.counselee_id)
    if root not in graph:
        raise StructuralError(f"Counselee {pedigree.counselee_id} not in pedigree")
    reachable = nx.node_connected_component(graph, root)
    unreachable = sorted(node[1] for node in graph if node[0] == "person" and node not in reachable)
    if unreachable:
        raise StructuralError(f"Members not connected to the counselee: {', '.join(unreachable)}",
                              diagnostics=[Diagnostic(pid, "unreachable member") for pid in unreachable])

    predecessors = nx.dfs_predecessors(graph, root)
    children: Dict[Tuple, List[str]] = {}
    for person in pedigree.members:
        if not person.is_founder:
            children.setdefault(_family_key(person), []).append(person.person_id)
    families = []
    for node in nx.dfs_postorder_nodes(graph, root):
        if node[0] != "family":
            continue
        _, mother, father = node
        families.append(NuclearFamily(mother, father, tuple(sorted(children[node])), predecessors[node][1]))
    return families


STRUCTURAL_RULES = ("pedigree loop", "unreachable member", "person is their own ancestor")


def require_valid(pedigree: Pedigree, db=None, max_age: int = 94) -> None:
    """Raise on the first invalid pedigree; structural problems raise StructuralError."""
    diagnostics = validate_pedigree(pedigree, db, max_age)
    if not diagnostics:
        return
    message = f"Invalid pedigree {pedigree.family_id}: " + "; ".join(str(d) for d in diagnostics)
    if any(d.rule in STRUCTURAL_RULES for d in diagnostics):
        raise StructuralError(message, diagnostics=diagnostics)
    raise InputError(message)
