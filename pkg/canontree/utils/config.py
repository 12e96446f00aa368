import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _int_setting(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return value


def _float_setting(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


# Worker threads for per-t / per-n fan-out
WORKERS = _int_setting("CANONTREE_WORKERS", 4, minimum=1)

LOG_LEVEL = os.getenv("CANONTREE_LOG_LEVEL", "WARNING").upper()

# Resource caps (largest n accepted)
COUNT_CAP = _int_setting("CANONTREE_COUNT_CAP", 2000)
MOMENTS_CAP = _int_setting("CANONTREE_MOMENTS_CAP", 2000)
DIST_CAPS = {
    "height": _int_setting("CANONTREE_DIST_CAP_HEIGHT", 300),
    "distinct_depths": _int_setting("CANONTREE_DIST_CAP_DEPTHS", 300),
    "last_level_leaves": _int_setting("CANONTREE_DIST_CAP_LAST_LEVEL", 2000),
    "width": _int_setting("CANONTREE_DIST_CAP_WIDTH", 150),
    "total_path_length": _int_setting("CANONTREE_DIST_CAP_TPL", 60),
}
WIDTH_MEAN_CAP = _int_setting("CANONTREE_WIDTH_MEAN_CAP", 4000)

# Decimal digits for exact probabilities in CSV output
PROB_DIGITS = _int_setting("CANONTREE_PROB_DIGITS", 12, minimum=1)

# Target width of the certified q0 enclosure
Q0_PRECISION = _float_setting("CANONTREE_Q0_PRECISION", 1e-13)

# Bisection depth limit for the local-limit scan
LLL_MAX_DEPTH = _int_setting("CANONTREE_LLL_MAX_DEPTH", 18, minimum=1)

# Truncation orders of the generating-function sums (J_b and J_sigma)
DEFAULT_TRUNCATION = {2: 14, 3: 10, 4: 8, 5: 6, 6: 5, 7: 5}


def default_truncation(t: int) -> int:
    """Default truncation order for arity t."""
    return DEFAULT_TRUNCATION.get(t, 4)
