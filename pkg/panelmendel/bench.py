import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
from flask import Blueprint, current_app

from panelmendel.command import handle_errors, seed_option
from panelmendel.db import engine_options
from panelmendel.engine.errors import InputError, ModelError
from panelmendel.engine.genotype import enumerate_pared, pared_size, unpared_size
from panelmendel.engine.model import EngineOptions
from panelmendel.engine.params import ParameterDB, synthetic_db
from panelmendel.engine.pedigree import Pedigree
from panelmendel.engine.posterior import PosteriorReport, posterior
from panelmendel.engine.simulator import TEMPLATES, FamilyTemplate, simulate_family
from panelmendel.formats import write_table

bp = Blueprint("bench", __name__, cli_group=None)

BENCH_COLUMNS = ["K", "M", "template", "familySize", "spaceSize", "unparedSize", "seconds", "maxDeviation", "error"]


def _timed(pedigree: Pedigree, db: ParameterDB, max_carriers: int, options: EngineOptions, horizons: Sequence[int],
           repeat: int) -> Tuple[PosteriorReport, float]:
    options = options._replace(max_carriers=max_carriers)
    space = enumerate_pared(db.genes, max_carriers, cap=options.space_cap)
    best = None
    for _ in range(repeat):
        start = time.perf_counter()
        report = posterior(pedigree, space, db, options, horizons=horizons)
        elapsed = time.perf_counter() - start
        best = elapsed if best is None else min(best, elapsed)
    return report, best


def bench_rows(gene_counts: Sequence[int], carrier_limits: Sequence[int], templates: Sequence[str],
               options: EngineOptions, seed: int = 0, repeat: int = 1,
               horizons: Sequence[int] = (5, 10)) -> List[Dict[str, Any]]:
    """One row per (K, template, M); M = K is always evaluated as the reference."""
    rows = []
    for gene_count in gene_counts:
        db = synthetic_db(gene_count)
        for name in templates:
            family = simulate_family(FamilyTemplate.named(name), db, seed=[seed, gene_count], family_id=name)
            pedigree = family.pedigree
            limits = sorted({min(limit, gene_count) for limit in carrier_limits} | {gene_count})

            # Reference posterior on the unpared space
            reference: Optional[PosteriorReport] = None
            try:
                reference, _ = _timed(pedigree, db, gene_count, options, horizons, 1)
            except ModelError as e:
                current_app.logger.info(f"No reference for K={gene_count} {name}: {e}")

            for limit in limits:
                row = {"K": gene_count, "M": limit, "template": name, "familySize": len(pedigree.members),
                       "spaceSize": pared_size(db.genes, limit), "unparedSize": unpared_size(db.genes),
                       "seconds": None, "maxDeviation": None, "error": None}
                try:
                    report, seconds = _timed(pedigree, db, limit, options, horizons, repeat)
                    row["seconds"] = round(seconds, 6)
                    if reference is not None:
                        row["maxDeviation"] = max_deviation(report, reference)
                except ModelError as e:
                    row["error"] = f"{type(e).__name__}: {e}"
                current_app.logger.info(f"K={gene_count} M={limit} {name}: {row['spaceSize']} genotypes, "
                                        f"{row['seconds']} s")
                rows.append(row)
    return rows


def max_deviation(report: PosteriorReport, reference: PosteriorReport) -> float:
    """Largest difference of per-gene and any-gene carrier probabilities."""
    keys = list(reference.per_gene)
    deviations = [abs(report.per_gene[key] - reference.per_gene[key]) for key in keys]
    deviations += [abs(report.groups[key] - reference.groups[key]) for key in reference.groups]
    return float(np.max(deviations)) if deviations else 0.0


def _int_list(text: str, what: str) -> List[int]:
    try:
        values = [int(value) for value in text.split(",") if value.strip()]
    except ValueError:
        raise InputError(f"{what} must be a comma separated list of integers, got {text!r}")
    minimum = 1 if what == "--genes" else 0
    if not values or min(values) < minimum:
        raise InputError(f"{what} has invalid values {values}")
    return values


@bp.cli.command("bench")
@click.option("--genes", type=str, default="2,3,5,11", show_default=True, help="Gene counts K.")
@click.option("-M", "--max-carriers", "carrier_limits", type=str, default="1,2,3", show_default=True,
              help="Carrier limits M, M = K is always added.")
@click.option("--template", "templates", type=str, default="trio,standard,large", show_default=True,
              help="Family templates.")
@click.option("--repeat", type=int, default=3, show_default=True, help="Timed evaluations per row, best is kept.")
@seed_option
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output CSV, stdout when omitted.")
@handle_errors
def bench(genes, carrier_limits, templates, repeat, seed, out) -> int:
    """Genotype space size and evaluation time over K, M and family size."""
    names = [name.strip() for name in templates.split(",") if name.strip()]
    unknown = [name for name in names if name not in TEMPLATES]
    if unknown:
        raise InputError(f"Unknown templates {unknown}")
    if repeat < 1:
        raise InputError("--repeat must be >= 1")
    rows = bench_rows(_int_list(genes, "--genes"), _int_list(carrier_limits, "-M"), names, engine_options(),
                      seed, repeat, current_app.config["RISK_HORIZONS"])
    text = write_table(out, BENCH_COLUMNS, rows)
    if not out:
        click.echo(text, nl=False)
    return 0
