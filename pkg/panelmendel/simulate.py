import click
from flask import Blueprint, current_app

from panelmendel.command import ancestry_option, handle_errors, params_option, seed_option
from panelmendel.db import engine_options, get_params
from panelmendel.engine.errors import InputError
from panelmendel.engine.simulator import TEMPLATES, FamilyTemplate, PrsConfig, simulate_cohort
from panelmendel.formats import write_cohort

bp = Blueprint("simulate", __name__, cli_group=None)


@bp.cli.command("simulate")
@params_option
@click.option("-n", "--count", type=int, required=True, help="Number of families.")
@click.option("--template", type=click.Choice(list(TEMPLATES)), default="standard", show_default=True,
              help="Family structure around the counselee.")
@seed_option
@click.option("--prs", type=str, default=None, help="Latent polygenic score as snps/maf/lo-hi, e.g. 20/0.1/0.8-1.2.")
@ancestry_option
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
@handle_errors
def simulate(params_path, count, template, seed, prs, ancestry, out) -> int:
    """Simulate a cohort with hidden counselee genotypes."""
    if count < 1:
        raise InputError(f"Cohort size must be >= 1, got {count}")
    db = get_params(params_path)
    family_template = FamilyTemplate.named(template)
    prs_config = PrsConfig.parse(prs) if prs else None
    ancestry = ancestry or db.default_ancestry
    censor_age_range = tuple(current_app.config["CENSOR_AGE_RANGE"])

    # Manifest echoes everything needed to regenerate the cohort
    manifest = {
        "params": params_path or current_app.config["PARAMS_PATH"],
        "genes": list(db.gene_ids),
        "cancers": list(db.cancers),
        "template": template,
        "members": family_template.relative_count() + 1,
        "seed": seed,
        "prs": str(prs_config) if prs_config else None,
        "ancestry": ancestry,
        "censorAgeRange": list(censor_age_range),
    }
    families = simulate_cohort(count, family_template, db, seed, prs_config, ancestry, censor_age_range,
                               engine_options())
    written = write_cohort(out, families, db.gene_ids, manifest)
    current_app.logger.info(f"Simulated {written} {template} families into {out}")
    return 0
