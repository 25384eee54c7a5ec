from typing import List, Optional

import click
from flask import Blueprint, current_app

from panelmendel.command import check_max_carriers, handle_errors, max_carriers_option, params_option
from panelmendel.db import engine_options, get_params
from panelmendel.engine.collapse import collapse_check
from panelmendel.engine.errors import InputError
from panelmendel.engine.fixtures import BATTERY_SEED, fixture_battery
from panelmendel.formats import collapse_to_dict, read_pedigrees, write_json

bp = Blueprint("collapse", __name__, cli_group=None)


def _subset(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    return [value.strip() for value in text.split(",") if value.strip()]


@bp.cli.command("collapse-check")
@params_option
@click.option("--genes", type=str, default=None, help="Kept genes, comma separated.")
@click.option("--cancers", type=str, default=None, help="Kept cancers, comma separated.")
@click.option("--force-condition", is_flag=True,
              help="Remove carrier associations of excluded cancers before comparing.")
@click.option("--pedigree", "pedigree_path", type=click.Path(dir_okay=False), default=None,
              help="Pedigrees to compare on, the bundled fixture battery when omitted.")
@click.option("--fixtures", "fixture_count", type=int, default=20, show_default=True,
              help="Size of the fixture battery.")
@click.option("--seed", type=int, default=BATTERY_SEED, show_default=True, help="Seed of the simulated fixtures.")
@max_carriers_option
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output JSON, stdout when omitted.")
@handle_errors
def collapse(params_path, genes, cancers, force_condition, pedigree_path, fixture_count, seed, max_carriers,
             out) -> int:
    """Compare submodel posteriors against the full model."""
    gene_subset, cancer_subset = _subset(genes), _subset(cancers)
    if gene_subset is None and cancer_subset is None:
        raise InputError("Give --genes, --cancers or both")
    max_carriers = check_max_carriers(max_carriers)
    db = get_params(params_path, max_carriers)
    fixtures = read_pedigrees(pedigree_path) if pedigree_path else fixture_battery(db, fixture_count, seed)
    current_app.logger.info(f"Checking collapsibility on {len(fixtures)} fixtures")

    reports = collapse_check(db, fixtures, gene_subset, cancer_subset, engine_options(max_carriers=max_carriers),
                             force_condition)
    text = write_json(out, [collapse_to_dict(report) for report in reports])
    if not out:
        click.echo(text, nl=False)
    for report in reports:
        if not report.condition_met:
            current_app.logger.warning(f"Collapsibility condition not met for excluded {report.kind} "
                                       f"{report.excluded}, max discrepancy {report.max_discrepancy:.3g}")
    return 0
