import os

from dotenv import load_dotenv

load_dotenv()


class APP:
    NAME = "monoap"
    WORKERS = int(os.getenv("MONOAP_WORKERS", "1"))
    PROGRESS = os.getenv("MONOAP_PROGRESS", "0") == "1"

    class LOG:
        LOG_FILE_PATH = "logs/monoap.log"
        LOG_TO_FILE = os.getenv("MONOAP_LOG_TO_FILE", "0") == "1"
        LOG_LEVEL = os.getenv("MONOAP_LOG_LEVEL", "INFO")

    class CACHE:
        CACHE_DIR = os.getenv("MONOAP_CACHE_DIR", "data/cache")


class SOLVER:
    class LP:
        TIME_BUDGET = float(os.getenv("MONOAP_LP_TIME_BUDGET", "60"))
        HARD_SYSTEM_DIR = os.getenv("MONOAP_HARD_SYSTEM_DIR", "data/hard_systems")

    class MONTE_CARLO:
        SAMPLES = 1_000_000
        SEED = 7
