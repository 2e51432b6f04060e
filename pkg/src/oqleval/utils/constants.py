"""Application constants and configuration."""

from pathlib import Path

# Application metadata
APP_NAME = "oqleval"
APP_VERSION = "0.1.0"

# File paths
HOME_DIR = Path.home()
CONFIG_DIR = HOME_DIR / ".config" / "oqleval"

# Configuration
DEFAULT_CONFIG_PATH = CONFIG_DIR / "config.json"

# Environment variables
ENV_ENDPOINT = "OVERPASS_ENDPOINT"
ENV_CLIENT_TOKEN = "GEN_CLIENT_TOKEN"
ENV_CACHE_DIR = "OQLEVAL_CACHE_DIR"

# Execution
DEFAULT_ENDPOINT = "https://overpass-api.de"
INTERPRETER_PATH = "/api/interpreter"
DEFAULT_REQUEST_TIMEOUT = 180.0
# south, west, north, east
DEFAULT_BBOX = (49.0, 8.0, 49.5, 8.5)
DEFAULT_MAX_INFLIGHT = 2
DEFAULT_MAX_ATTEMPTS = 3
DEFAULT_BACKOFF_SECONDS = 2.0
DEFAULT_SAMPLE_SIZE = 1
# raw element records kept per outcome for feedback
OUTCOME_SAMPLE_CAP = 20
DEFAULT_USER_AGENT = f"{APP_NAME}/{APP_VERSION}"
NO_RESULTS_FEEDBACK = "No Results found."

# Overpass area ids are offsets of the originating way or relation id
AREA_ID_OFFSET_RELATION = 3600000000
AREA_ID_OFFSET_WAY = 2400000000

# Metrics
CHRF_CHAR_ORDER = 6
CHRF_BETA = 2
BLEU_MAX_ORDER = 4

# Harness
DEFAULT_SHOT_COUNT = 5
DEFAULT_MAX_LENGTH = 512
STOP_SEQUENCE = "\n\nInput:"

# Corpus
SPLITS = ("train", "dev", "test")
EVAL_SPLITS = ("dev", "test")
SYNTHETIC_ID_SUFFIX = "#comments"

# CLI exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
