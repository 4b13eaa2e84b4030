"""Application settings loaded from environment variables."""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# Paths
PROJECT_ROOT = Path(__file__).parent.parent
DEFAULT_EXPERIMENT_PATH = PROJECT_ROOT / "config" / "default_experiment.json"
OUTPUT_DIR = Path(os.getenv("RADIOMICS_OUTPUT_DIR", str(PROJECT_ROOT / "output")))

# Logging
LOG_LEVEL = os.getenv("RADIOMICS_LOG_LEVEL", "INFO").upper()

# Execution
WORKERS = int(os.getenv("RADIOMICS_WORKERS", "1"))
DEFAULT_SEED = int(os.environ["RADIOMICS_SEED"]) if os.getenv("RADIOMICS_SEED") else None

# Result file names inside an output directory
EFFECTIVE_CONFIG_FILE = "effective_config.json"
SPEC_ECHO_FILE = "spec_echo.json"
FEATURES_FILE = "features.csv"
AUC_MATRIX_FILE = "auc_matrix.csv"
DELONG_FILE = "delong.csv"
ROC_POINTS_FILE = "roc_points.csv"
REPORT_FILE = "report.txt"
