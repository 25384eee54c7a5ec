from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
from flask import Blueprint, current_app

from panelmendel.command import (ExitStatus, ancestry_option, check_horizons, check_max_carriers, handle_errors,
                                 max_carriers_option, modifiers_option, params_option, risk_kind)
from panelmendel.db import engine_options, get_params, get_space
from panelmendel.engine.errors import InvariantError, ModelError
from panelmendel.engine.genotype import ParedGenotypeSpace
from panelmendel.engine.likelihood import ModifiedCurveCache
from panelmendel.engine.model import DiagnosticLog, EngineOptions, RiskKind
from panelmendel.engine.params import ParameterDB
from panelmendel.engine.pedigree import Pedigree
from panelmendel.engine.posterior import posterior
from panelmendel.formats import error_record, read_pedigrees, report_to_dict, write_json
from panelmendel.pool import ordered_map, worker_count

bp = Blueprint("predict", __name__, cli_group=None)

Outcome = Tuple[Dict[str, Any], Optional[Exception]]


class Predictor:
    """Evaluates pedigrees against one database; safe to share between pool threads."""

    def __init__(self, db: ParameterDB, space: ParedGenotypeSpace, options: EngineOptions,
                 horizons: Sequence[int], kind: RiskKind, ancestry: Optional[str] = None) -> None:
        self.db = db
        self.space = space
        self.options = options
        self.horizons = list(horizons)
        self.kind = kind
        self.ancestry = ancestry
        self.cache = ModifiedCurveCache()

    def evaluate(self, pedigree: Pedigree) -> Outcome:
        try:
            report = posterior(pedigree, self.space, self.db, self.options, self.ancestry, self.horizons,
                               self.cache, DiagnosticLog())
            return report_to_dict(report, self.kind), None
        except (ModelError, InvariantError) as e:
            return error_record(pedigree.family_id, e), e


def build_predictor(params_path: Optional[str], max_carriers: Optional[int], use_modifiers: Optional[bool],
                    horizons: Sequence[int], risk: Optional[str], ancestry: Optional[str]) -> Predictor:
    max_carriers = check_max_carriers(max_carriers)
    db = get_params(params_path, max_carriers)
    options = engine_options(max_carriers=max_carriers, use_modifiers=use_modifiers)
    return Predictor(db, get_space(db, max_carriers), options, check_horizons(horizons), risk_kind(risk), ancestry)


def predict_all(predictor: Predictor, pedigrees: Sequence[Pedigree], status: ExitStatus) -> List[Dict[str, Any]]:
    records = []
    workers = worker_count(current_app.config["WORKERS"])
    for pedigree, (record, error) in zip(pedigrees, ordered_map(predictor.evaluate, pedigrees, workers)):
        if error is not None:
            status.record(pedigree.family_id, error)
        records.append(record)
    return records


@bp.cli.command("predict")
@params_option
@click.option("--pedigree", "pedigree_path", type=click.Path(dir_okay=False), required=True,
              help="Pedigree file (JSON, JSONL or CSV).")
@max_carriers_option
@click.option("--t0", "horizons", type=int, multiple=True, help="Risk horizon in years, repeatable.")
@ancestry_option
@modifiers_option
@click.option("--risk", type=click.Choice([kind.value for kind in RiskKind]), default=None,
              help="Reported future risk kind.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output JSON, stdout when omitted.")
@handle_errors
def predict(params_path, pedigree_path, max_carriers, horizons, ancestry, use_modifiers, risk, out) -> int:
    """Carrier probabilities and future risks of every counselee."""
    predictor = build_predictor(params_path, max_carriers, use_modifiers, horizons, risk, ancestry)
    pedigrees = read_pedigrees(pedigree_path)
    current_app.logger.info(f"Evaluating {len(pedigrees)} pedigrees with K={len(predictor.db.genes)}, "
                            f"M={predictor.space.max_carriers}, {predictor.space.size} genotypes")

    status = ExitStatus()
    records = predict_all(predictor, pedigrees, status)
    text = write_json(out, records)
    if not out:
        click.echo(text, nl=False)
    if status.failed:
        current_app.logger.warning(f"{len(status.failed)} of {len(pedigrees)} pedigrees failed: {status.failed}")
    return status.code
