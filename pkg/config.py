"""
Configuration settings for the second-order tangent bundle verification toolkit.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from config.env file
load_dotenv(dotenv_path='config.env')

ROOT_DIR = Path(__file__).parent

# Ensure the data directory exists
DATA_DIR = ROOT_DIR / "data"
DATA_DIR.mkdir(exist_ok=True)

# Ensure the logs directory exists
LOGS_DIR = DATA_DIR / "logs"
LOGS_DIR.mkdir(exist_ok=True)

REPORTS_DIR = DATA_DIR / "reports"
REPORTS_DIR.mkdir(exist_ok=True)

# Numerical tolerances
TOLERANCE_CONFIG = {
    # cocycles, roundtrips, compatibility residuals of exact fields
    "structural": 1e-10,
    # finite-difference comparisons
    "fd": 1e-6,
    # Christoffel symbols derived from a metric by finite differences
    "fd_metric": 1e-8,
    # tower identities and H0 membership
    "group": 1e-12,
    # a fault injection must push the residual above this
    "fault": 1e-3,
    # the raw jet chart change must be at least this nonlinear on curved overlaps
    "witness": 1e-2,
}

# Finite-difference oracle
FD_CONFIG = {
    "step": 1e-4,
    "metric_step": 1e-5,
    "samples": 8,
    # step halving: coarse step, smallest readable coarse error, accepted relative deviation of the ratio from 4
    "convergence_step": 1e-2,
    "convergence_floor": 1e-8,
    "convergence_band": 0.25,
}

# Random sampling
SAMPLING_CONFIG = {
    "seed": 0,
    "jets_per_chart": 100,
    "triples_per_overlap": 20,
    "tower_jets": 50,
    "tower_families": 100,
    "polynomial_pairs": 50,
    "probes": 5,
}

# Verification harness
VERIFY_CONFIG = {
    "suites": ["calculus", "atlas", "connection", "bundle", "tower"],
    "fixture_dir": os.getenv("T2_FIXTURE_DIR"),
    "fixture_suffix": ".toml",
}

# Data paths
DATA_PATHS = {
    "fixtures": str(ROOT_DIR / "fixtures"),
    "reports": str(REPORTS_DIR),
    "logs": str(LOGS_DIR),
}

# Logging configuration
LOGGING_CONFIG = {
    "level": os.getenv("T2_LOG_LEVEL", "INFO"),
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "file_prefix": "verify",
}
