import os

# Parameter database
PARAMS_PATH = os.environ.get("PARAMS_PATH",
                             os.path.join(os.path.dirname(__file__), "..", "panelmendel", "data",
                                          "synthetic_params.json"))
MAX_AGE = 94
CLAMP_TOLERANCE = 1e-3
# Genotype space
MAX_CARRIERS = 2
SPACE_CAP = 10 ** 6
TRANSMISSION_CAP = 16 * 10 ** 6  # cells of the dense transmission tensor
BRUTE_FORCE_CAP = 10 ** 8
# Model switches
USE_MODIFIERS = True
MULTI_CARRIER_RULE = "product"  # or "max"
GERMLINE_SENSITIVITY = 1.0
GERMLINE_SPECIFICITY = 1.0
# Reports
RISK_HORIZONS = [5, 10]
RISK_KIND = "crude"
# Validation
BOOTSTRAP_REPLICATES = 1000
CENSOR_AGE_RANGE = (20, 94)
# Worker pool, None falls back to PANEL_MENDEL_THREADS or the CPU count
WORKERS = None
LOG_LEVEL = "INFO"
