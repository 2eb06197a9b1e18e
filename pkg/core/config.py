import logging
import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# Paths
BASE_DIR: Path = Path(__file__).resolve().parent.parent
OUTPUTS_DIR: Path = BASE_DIR / os.environ.get("OUTPUTS_DIR", "outputs")

# Logging
LOG_LEVEL: str = os.environ.get("LOG_LEVEL", "INFO").upper()

# Worker count for the deterministic data-parallel mode
SKETCHNET_THREADS_RAW: str = os.environ.get("SKETCHNET_THREADS", "1")

# Optimization defaults (full-size 0-255 images)
DEFAULT_LEARNING_RATE: float = 1e-11
DEFAULT_ALPHA: float = 1e4
DEFAULT_LAMBDA: float = 1e9
DEFAULT_BATCH_SIZE: int = 8
DEFAULT_INIT_STD: float = 0.01
DEFAULT_SEED: int = 0

# Geometry (heights first; the aligned canvas is 200 wide x 250 tall)
ALIGNED_HEIGHT: int = 250
ALIGNED_WIDTH: int = 200
PHOTO_HEIGHT: int = 200
PHOTO_WIDTH: int = 155
SKETCH_HEIGHT: int = 188
SKETCH_WIDTH: int = 143
CANONICAL_LEFT_EYE: tuple[float, float] = (75.0, 125.0)    # (x, y)
CANONICAL_RIGHT_EYE: tuple[float, float] = (125.0, 125.0)  # (x, y)

# Evaluation
MPRL_SCALES: tuple[float, ...] = (0.5, 1.0, 2.0)
DEFAULT_RANKS: tuple[int, ...] = (1, 3, 5, 10)

# Model container
MODEL_MAGIC: bytes = b"SKNT"
MODEL_FORMAT_VERSION: int = 1


def threads_from_env() -> int:
    """Worker count from SKETCHNET_THREADS, falling back to 1 when unset."""
    try:
        return max(1, int(SKETCHNET_THREADS_RAW))
    except ValueError:
        return 1


def validate_config() -> list[str]:
    """Return a list of problems with the environment configuration."""
    problems = []
    if not isinstance(logging.getLevelName(LOG_LEVEL), int):
        problems.append(f"LOG_LEVEL={LOG_LEVEL!r} is not a logging level")
    try:
        if int(SKETCHNET_THREADS_RAW) < 1:
            problems.append("SKETCHNET_THREADS must be >= 1")
    except ValueError:
        problems.append(f"SKETCHNET_THREADS={SKETCHNET_THREADS_RAW!r} is not an integer")
    return problems
