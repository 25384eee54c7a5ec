"""File adapters: pedigrees (JSON, JSONL, CSV), cohorts, truth labels, reports and metrics."""

import csv
import io
import json
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from panelmendel.engine.collapse import CollapseReport
from panelmendel.engine.errors import InputError
from panelmendel.engine.metrics import CohortMetrics
from panelmendel.engine.model import GermlineResult, RiskKind, Sex
from panelmendel.engine.pedigree import (CancerEntry, GermlineTest, InterventionEntry, MarkerResult, Pedigree,
                                         Person)
from panelmendel.engine.posterior import PosteriorReport, reported_risk
from panelmendel.engine.simulator import SimulatedFamily, truth_labels

COHORT_FILE = "cohort.jsonl"
LABELS_FILE = "labels.csv"
MANIFEST_FILE = "manifest.json"
METRIC_COLUMNS = ["label", "metric", "point", "ciLow", "ciHigh", "n", "nCases"]


# -- pedigrees -------------------------------------------------------------------------------------

def _optional_int(value: Any, what: str, person_id: str) -> Optional[int]:
    if value is None or value == "":
        return None
    try:
        return int(value)
    except (TypeError, ValueError):
        raise InputError(f"{person_id}: {what} must be an integer, got {value!r}")


SEX_ABBREVIATIONS = {"f": "female", "m": "male"}


def _sex(value: Any) -> Optional[Sex]:
    text = str(value).strip().lower()
    try:
        return Sex(SEX_ABBREVIATIONS.get(text, text))
    except ValueError:
        return None


def _germline(value: Any, person_id: str) -> GermlineResult:
    try:
        return GermlineResult(str(value).lower())
    except ValueError:
        raise InputError(f"{person_id}: germline result must be carrier or noncarrier, got {value!r}")


def person_from_dict(doc: Dict[str, Any]) -> Person:
    if not isinstance(doc, dict) or doc.get("id") in (None, ""):
        raise InputError(f"Person record without id: {doc!r}")
    pid = str(doc["id"])
    try:
        return Person(
            person_id=pid,
            sex=_sex(doc.get("sex")),
            censor_age=_optional_int(doc.get("age"), "age", pid),
            mother_id=str(doc["motherId"]) if doc.get("motherId") not in (None, "") else None,
            father_id=str(doc["fatherId"]) if doc.get("fatherId") not in (None, "") else None,
            deceased=bool(doc.get("deceased", False)),
            ancestry=doc.get("ancestry") or None,
            cancers=tuple(CancerEntry(str(entry["cancer"]), _optional_int(entry.get("age"), "diagnosis age", pid))
                          for entry in doc.get("cancers", [])),
            markers=tuple(MarkerResult(str(entry["marker"]), bool(entry["positive"]))
                          for entry in doc.get("markers", [])),
            germline=tuple(GermlineTest(str(entry["gene"]), _germline(entry["result"], pid))
                           for entry in doc.get("germline", [])),
            interventions=tuple(InterventionEntry(str(entry["intervention"]),
                                                  _optional_int(entry.get("age"), "intervention age", pid))
                                for entry in doc.get("interventions", [])))
    except (KeyError, TypeError) as e:
        raise InputError(f"{pid}: malformed person record ({e})")


def person_to_dict(person: Person) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"id": person.person_id, "motherId": person.mother_id, "fatherId": person.father_id,
                           "sex": person.sex.value if person.sex else None, "age": person.censor_age,
                           "deceased": person.deceased}
    if person.ancestry:
        doc["ancestry"] = person.ancestry
    if person.cancers:
        doc["cancers"] = [{"cancer": entry.cancer_id, "age": entry.age} for entry in person.cancers]
    if person.markers:
        doc["markers"] = [{"marker": entry.marker_id, "positive": entry.positive} for entry in person.markers]
    if person.germline:
        doc["germline"] = [{"gene": test.gene_id, "result": test.result.value} for test in person.germline]
    if person.interventions:
        doc["interventions"] = [{"intervention": entry.intervention_id, "age": entry.age}
                                for entry in person.interventions]
    return doc


def pedigree_from_dict(doc: Dict[str, Any], default_family_id: str = "") -> Pedigree:
    if not isinstance(doc, dict) or not isinstance(doc.get("members"), list):
        raise InputError("Pedigree must be an object with a members list")
    members = tuple(person_from_dict(member) for member in doc["members"])
    counselee_id = doc.get("counseleeId")
    if counselee_id is None:
        flagged = [member["id"] for member in doc["members"] if member.get("isCounselee")]
        if len(flagged) != 1:
            raise InputError(f"Pedigree {doc.get('familyId', default_family_id)} needs exactly one counselee")
        counselee_id = flagged[0]
    return Pedigree(members, str(counselee_id), str(doc.get("familyId", default_family_id)))


def pedigree_to_dict(pedigree: Pedigree) -> Dict[str, Any]:
    return {"familyId": pedigree.family_id, "counseleeId": pedigree.counselee_id,
            "members": [person_to_dict(member) for member in pedigree.members]}


def _csv_flag(value: str) -> bool:
    return str(value).strip().lower() in ("1", "true", "yes", "y")


def read_pedigree_csv(path: str) -> List[Pedigree]:
    """One row per person, grouped by familyId.

    Columns: familyId, id, motherId, fatherId, sex, age, deceased, ancestry,
    isCounselee, then cancer:<id> (diagnosis age), marker:<id> (positive or
    negative), germline:<gene> (carrier or noncarrier), intervention:<id> (age).
    """
    families: Dict[str, List[Dict[str, Any]]] = {}
    with open(path, mode="r", newline="") as input:
        for row in csv.DictReader(input):
            pid = row.get("id", "")
            doc: Dict[str, Any] = {
                "id": pid, "motherId": row.get("motherId"), "fatherId": row.get("fatherId"),
                "sex": row.get("sex"), "age": row.get("age"), "deceased": _csv_flag(row.get("deceased", "")),
                "ancestry": row.get("ancestry"), "isCounselee": _csv_flag(row.get("isCounselee", "")),
                "cancers": [], "markers": [], "germline": [], "interventions": []}
            for column, value in row.items():
                if column is None or ":" not in column or value in (None, ""):
                    continue
                kind, name = column.split(":", 1)
                if kind == "cancer":
                    doc["cancers"].append({"cancer": name, "age": value})
                elif kind == "marker":
                    if value.strip().lower() not in ("positive", "negative"):
                        raise InputError(f"{pid}: marker {name} must be positive or negative, got {value!r}")
                    doc["markers"].append({"marker": name, "positive": value.strip().lower() == "positive"})
                elif kind == "germline":
                    doc["germline"].append({"gene": name, "result": value})
                elif kind == "intervention":
                    doc["interventions"].append({"intervention": name, "age": value})
                else:
                    raise InputError(f"Unknown column {column}")
            families.setdefault(row.get("familyId", ""), []).append(doc)
    return [pedigree_from_dict({"familyId": family_id, "members": members})
            for family_id, members in families.items()]


def read_pedigrees(path: str) -> List[Pedigree]:
    """Pedigrees from a JSON document (one pedigree or a list), a JSONL stream or a CSV table."""
    try:
        if path.endswith(".csv"):
            return read_pedigree_csv(path)
        with open(path, mode="r") as input:
            if path.endswith(".jsonl"):
                docs = [json.loads(line) for line in input if line.strip()]
            else:
                docs = json.load(input)
    except json.JSONDecodeError as e:
        raise InputError(f"Cannot parse {path}: {e.msg} (line {e.lineno})")
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e.strerror}")
    if isinstance(docs, dict):
        docs = [docs]
    return [pedigree_from_dict(doc, default_family_id=f"family{i}") for i, doc in enumerate(docs)]


# -- cohorts ---------------------------------------------------------------------------------------

def write_cohort(directory: str, families: Iterable[SimulatedFamily], gene_ids: Sequence[str],
                 manifest: Dict[str, Any]) -> int:
    """Write cohort.jsonl, labels.csv and manifest.json; returns the family count."""
    try:
        os.makedirs(directory, exist_ok=True)
        count = 0
        with open(os.path.join(directory, COHORT_FILE), mode="w") as cohort, \
                open(os.path.join(directory, LABELS_FILE), mode="w", newline="") as labels:
            writer = csv.writer(labels, lineterminator="\n")
            writer.writerow(["familyId", "geneId", "trueState"])
            for family in families:
                cohort.write(json.dumps(pedigree_to_dict(family.pedigree)) + "\n")
                writer.writerows(truth_labels(family, gene_ids))
                count += 1
        with open(os.path.join(directory, MANIFEST_FILE), mode="w") as output:
            json.dump(dict(manifest, families=count), output, indent=2)
            output.write("\n")
    except OSError as e:
        raise InputError(f"Cannot write cohort to {directory}: {e.strerror}")
    return count


def read_labels(path: str) -> Dict[str, Dict[str, int]]:
    labels: Dict[str, Dict[str, int]] = {}
    try:
        with open(path, mode="r", newline="") as input:
            for row in csv.DictReader(input):
                try:
                    labels.setdefault(row["familyId"], {})[row["geneId"]] = int(row["trueState"])
                except (KeyError, ValueError):
                    raise InputError(f"Malformed label row {row}")
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e.strerror}")
    return labels


# -- reports ---------------------------------------------------------------------------------------

def _number(value: Optional[float]) -> Optional[float]:
    return None if value is None else float(value)


def report_to_dict(report: PosteriorReport, kind: RiskKind = RiskKind.CRUDE) -> Dict[str, Any]:
    return {
        "familyId": report.family_id,
        "counseleeId": report.counselee_id,
        "ancestry": report.ancestry,
        "genes": list(report.gene_ids),
        "genotypePosterior": [{"genotype": [int(s) for s in genotype], "probability": float(probability)}
                              for genotype, probability in zip(report.genotypes, report.genotype_posterior)],
        "perGeneCarrierProb": report.per_gene,
        "groupCarrierProb": report.groups,
        "futureRisk": {cancer_id: {str(horizon): {"net": risk.net, "crude": risk.crude,
                                                  "reported": reported_risk(risk, kind)}
                                   for horizon, risk in risks.items()}
                       for cancer_id, risks in report.future_risk.items()},
        "riskKind": kind.value,
        "logLikelihood": report.log_likelihood,
        "diagnostics": list(report.diagnostics),
    }


def error_record(family_id: str, error: Exception) -> Dict[str, Any]:
    record = {"familyId": family_id, "error": type(error).__name__, "message": str(error)}
    diagnostics = getattr(error, "diagnostics", None)
    if diagnostics:
        record["diagnostics"] = [str(d) for d in diagnostics]
    return record


def write_json(path: Optional[str], payload: Any) -> str:
    text = json.dumps(payload, indent=2, default=_json_default) + "\n"
    if path:
        try:
            with open(path, mode="w") as output:
                output.write(text)
        except OSError as e:
            raise InputError(f"Cannot write {path}: {e.strerror}")
    return text


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def metrics_rows(metrics: CohortMetrics) -> List[Dict[str, Any]]:
    rows = []
    for label, values in metrics.labels.items():
        for name, value in (("auc", values.auc), ("eOverO", values.e_over_o), ("mse", values.mse)):
            rows.append({"label": label, "metric": name, "point": _number(value.point),
                         "ciLow": _number(value.ci_low), "ciHigh": _number(value.ci_high),
                         "n": values.n, "nCases": values.n_cases})
    return rows


def write_metrics(prefix: str, metrics: CohortMetrics) -> None:
    """Write <prefix>.json and <prefix>.csv."""
    rows = metrics_rows(metrics)
    write_json(f"{prefix}.json", {"replicates": metrics.replicates, "metrics": rows,
                                  "diagnostics": list(metrics.diagnostics)})
    write_table(f"{prefix}.csv", METRIC_COLUMNS, rows)


def write_table(path: Optional[str], columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    """CSV text of `rows`, also written to `path` when given."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: "" if value is None else value for key, value in row.items()})
    text = buffer.getvalue()
    if path:
        try:
            with open(path, mode="w", newline="") as output:
                output.write(text)
        except OSError as e:
            raise InputError(f"Cannot write {path}: {e.strerror}")
    return text


def collapse_to_dict(report: CollapseReport) -> Dict[str, Any]:
    return {"kind": report.kind, "kept": report.kept, "excluded": report.excluded,
            "conditionMet": report.condition_met, "maxDiscrepancy": report.max_discrepancy,
            "status": "ok" if report.condition_met else "condition not met",
            "fixtures": [{"familyId": f.family_id, "discrepancy": f.discrepancy, "error": f.error}
                         for f in report.fixtures]}
