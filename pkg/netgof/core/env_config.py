
import os
from dotenv import load_dotenv

load_dotenv()

class EnvConfig:
    """
    Gets environment variables from env file
    """

    PROJECT_VERSION = os.getenv("PROJECT_VERSION", "/v1")

    # Logging
    LOG_DIR = os.getenv("LOG_DIR", "logs")
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    # Where the service writes simulation results
    OUTPUT_DIR = os.getenv("OUTPUT_DIR", "results")

    # Reproducibility and parallelism defaults
    DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "0"))
    SIM_THREADS = int(os.getenv("SIM_THREADS", "1"))

    # Numerical cutoffs
    DENSE_EIGEN_CUTOFF = int(os.getenv("DENSE_EIGEN_CUTOFF", "2000"))
    SNR_MAX_N = int(os.getenv("SNR_MAX_N", "5000"))
    KNN_EXACT_SMAX_MAX_N = int(os.getenv("KNN_EXACT_SMAX_MAX_N", "20000"))


config = EnvConfig()
