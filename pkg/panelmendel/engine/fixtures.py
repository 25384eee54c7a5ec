"""Pedigree fixtures shared by the collapsibility check, the benchmark and the tests."""

from typing import List, Optional, Sequence, Tuple

from panelmendel.engine.model import Sex
from panelmendel.engine.params import ParameterDB
from panelmendel.engine.pedigree import CancerEntry, InterventionEntry, MarkerResult, Pedigree, Person
from panelmendel.engine.simulator import TEMPLATES, simulate_family

BATTERY_SEED = 20240501
F, M = Sex.FEMALE, Sex.MALE


def person(person_id: str, sex: Sex, age: int, mother: Optional[str] = None, father: Optional[str] = None,
           cancers: Sequence[Tuple[str, int]] = (), markers: Sequence[Tuple[str, bool]] = (),
           interventions: Sequence[Tuple[str, int]] = (), deceased: bool = False) -> Person:
    return Person(person_id, sex, age, mother, father, deceased, None,
                  tuple(CancerEntry(c, a) for c, a in cancers), tuple(MarkerResult(m, r) for m, r in markers),
                  (), tuple(InterventionEntry(i, a) for i, a in interventions))


def handcrafted() -> List[Pedigree]:
    """Small families with breast and colorectal histories."""
    return [
        Pedigree((person("counselee", F, 40),), "counselee", "solo"),
        Pedigree((person("mother", F, 62, cancers=[("breast", 35)]),
                  person("father", M, 64),
                  person("counselee", F, 30, "mother", "father")), "counselee", "trio"),
        Pedigree((person("grandmother", F, 70, cancers=[("breast", 38)], deceased=True),
                  person("grandfather", M, 75, deceased=True),
                  person("mother", F, 60, "grandmother", "grandfather", cancers=[("breast", 42)],
                         markers=[("ER", False)]),
                  person("aunt", F, 52, "grandmother", "grandfather", cancers=[("breast", 33)]),
                  person("uncle", M, 58, "grandmother", "grandfather", cancers=[("colorectal", 45)]),
                  person("father", M, 63),
                  person("counselee", F, 35, "mother", "father")), "counselee", "maternal-breast"),
        Pedigree((person("grandmother", F, 80),
                  person("grandfather", M, 82, cancers=[("breast", 50)]),
                  person("aunt1", F, 55, "grandmother", "grandfather", cancers=[("breast", 29)]),
                  person("aunt2", F, 57, "grandmother", "grandfather", cancers=[("breast", 31)],
                         interventions=[("mastectomy", 32)]),
                  person("father", M, 59, "grandmother", "grandfather"),
                  person("mother", F, 58),
                  person("counselee", F, 28, "mother", "father"),
                  person("brother", M, 26, "mother", "father")), "counselee", "paternal-breast"),
        Pedigree((person("grandmother", F, 77),
                  person("grandfather", M, 70, cancers=[("colorectal", 45)], deceased=True),
                  person("father", M, 55, "grandmother", "grandfather", cancers=[("colorectal", 38)],
                         markers=[("MSI", True)]),
                  person("mother", F, 54),
                  person("counselee", M, 30, "mother", "father"),
                  person("sister", F, 33, "mother", "father", interventions=[("colectomy", 31)])),
                 "counselee", "colorectal"),
        Pedigree((person("mother", F, 66, cancers=[("breast", 44)]),
                  person("father", M, 68),
                  person("stepfather", M, 65, cancers=[("colorectal", 60)]),
                  person("counselee", F, 41, "mother", "father"),
                  person("half_brother", M, 35, "mother", "stepfather")), "counselee", "half-siblings"),
        Pedigree((person("mother", F, 65, cancers=[("breast", 40), ("contralateral_breast", 46)]),
                  person("father", M, 67),
                  person("counselee", F, 38, "mother", "father"),
                  person("daughter", F, 12, "counselee", "partner"),
                  person("partner", M, 40)), "counselee", "contralateral"),
    ]


def restrict_to(pedigree: Pedigree, db: ParameterDB) -> Pedigree:
    """Drop history entries the database has no vocabulary for."""
    cancers = set(db.cancers) | {link.secondary for link in db.secondary.values()}
    interventions = {key[0] for key in db.intervention_effects}
    members = []
    for member in pedigree.members:
        kept = tuple(entry for entry in member.cancers if entry.cancer_id in cancers)
        # a secondary cancer needs its primary
        kept = tuple(entry for entry in kept if entry.cancer_id in db.cancers or any(
            link.secondary == entry.cancer_id and member.diagnosis_age(link.primary) is not None
            and link.primary in db.cancers for link in db.secondary.values()))
        members.append(member._replace(
            cancers=kept,
            markers=tuple(m for m in member.markers if m.marker_id in db.markers),
            germline=tuple(g for g in member.germline if g.gene_id in db.gene_ids),
            interventions=tuple(i for i in member.interventions if i.intervention_id in interventions)))
    return pedigree._replace(members=tuple(members))


def fixture_battery(db: ParameterDB, count: int = 20, seed: int = BATTERY_SEED) -> List[Pedigree]:
    """Handcrafted fixtures followed by simulated families, `count` in total."""
    battery = [restrict_to(pedigree, db) for pedigree in handcrafted()][:count]
    templates = [TEMPLATES["standard"], TEMPLATES["nuclear"], TEMPLATES["trio"]]
    index = 0
    while len(battery) < count:
        family = simulate_family(templates[index % len(templates)], db, seed=[seed, index],
                                 family_id=f"simulated{index:02d}")
        battery.append(family.pedigree)
        index += 1
    return battery
