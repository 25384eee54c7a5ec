import os
from typing import Dict, List, Sequence

import click
from flask import Blueprint, current_app

from panelmendel.command import (ExitStatus, ancestry_option, handle_errors, max_carriers_option, modifiers_option,
                                 params_option, seed_option)
from panelmendel.engine.errors import InputError
from panelmendel.engine.metrics import LabeledPrediction, score_cohort
from panelmendel.engine.model import DiagnosticLog
from panelmendel.engine.pedigree import Pedigree
from panelmendel.engine.posterior import ANY_GROUP
from panelmendel.formats import COHORT_FILE, LABELS_FILE, read_labels, read_pedigrees, write_json, write_metrics
from panelmendel.predict import build_predictor, predict_all

bp = Blueprint("validate", __name__, cli_group=None)


def match_labels(pedigrees: Sequence[Pedigree], labels: Dict[str, Dict[str, int]]) -> None:
    """Cohort and labels must list the same families."""
    family_ids = {pedigree.family_id for pedigree in pedigrees}
    orphans = sorted(family_ids.symmetric_difference(labels))
    if orphans:
        shown = ", ".join(orphans[:20]) + (" ..." if len(orphans) > 20 else "")
        raise InputError(f"{len(orphans)} families without a counterpart in cohort or labels: {shown}")


def labeled_predictions(report: Dict, truth: Dict[str, int],
                        groups: Dict[str, Sequence[str]]) -> List[LabeledPrediction]:
    """One prediction per gene, per group and for carrying any gene."""
    family_id = report["familyId"]
    missing = [gene_id for gene_id in report["genes"] if gene_id not in truth]
    if missing:
        raise InputError(f"{family_id}: no truth label for genes {missing}")
    predictions = [LabeledPrediction(family_id, gene_id, probability, truth[gene_id] != 0)
                   for gene_id, probability in report["perGeneCarrierProb"].items()]
    for name, probability in report["groupCarrierProb"].items():
        members = report["genes"] if name == ANY_GROUP else groups[name]
        predictions.append(LabeledPrediction(family_id, name, probability,
                                             any(truth[gene_id] != 0 for gene_id in members)))
    return predictions


@bp.cli.command("validate")
@params_option
@click.option("--cohort", "cohort_path", type=click.Path(exists=False), required=True,
              help="Cohort directory or pedigree file.")
@click.option("--labels", "labels_path", type=click.Path(dir_okay=False), default=None,
              help="Truth labels CSV, defaults to labels.csv next to the cohort.")
@max_carriers_option
@ancestry_option
@modifiers_option
@click.option("--replicates", type=int, default=None, help="Bootstrap replicates.")
@seed_option
@click.option("--out", type=str, required=True, help="Output prefix, writes <out>.json and <out>.csv.")
@handle_errors
def validate(params_path, cohort_path, labels_path, max_carriers, ancestry, use_modifiers, replicates, seed,
             out) -> int:
    """Score carrier probabilities of a labeled cohort."""
    if os.path.isdir(cohort_path):
        labels_path = labels_path or os.path.join(cohort_path, LABELS_FILE)
        cohort_path = os.path.join(cohort_path, COHORT_FILE)
    if not labels_path:
        raise InputError("--labels is required when --cohort is a file")
    replicates = current_app.config["BOOTSTRAP_REPLICATES"] if replicates is None else replicates
    if replicates < 2:
        raise InputError(f"--replicates must be >= 2, got {replicates}")

    pedigrees = read_pedigrees(cohort_path)
    labels = read_labels(labels_path)
    match_labels(pedigrees, labels)
    predictor = build_predictor(params_path, max_carriers, use_modifiers, [], None, ancestry)
    # Carrier probabilities only
    predictor.horizons = []
    current_app.logger.info(f"Validating {len(pedigrees)} families against {labels_path}")

    # Evaluate families
    status = ExitStatus()
    records = predict_all(predictor, pedigrees, status)
    predictions: List[LabeledPrediction] = []
    errors = []
    for record in records:
        if "error" in record:
            errors.append(record)
            continue
        predictions.extend(labeled_predictions(record, labels[record["familyId"]], predictor.db.groups))

    # Score
    warnings = DiagnosticLog(current_app.logger)
    metrics = score_cohort(predictions, replicates=replicates, seed=seed, warnings=warnings)
    write_metrics(out, metrics)
    if errors:
        write_json(f"{out}.errors.json", errors)
    current_app.logger.info(f"Wrote metrics for {len(metrics.labels)} labels to {out}.json and {out}.csv")
    return status.code
