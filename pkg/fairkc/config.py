"""
Runtime settings for fairkc.

Defaults follow the benchmark methodology; each tunable can be overridden
through the environment. There are no configuration files.
"""

import os

from fairkc.utils.resource_monitor import available_workers

# Logging
LOG_LEVEL = os.environ.get("FAIRKC_LOG_LEVEL", "INFO").upper()

# Trial harness
DEFAULT_TRIALS = 10000
BATCH_SIZE = int(os.environ.get("FAIRKC_BATCH_SIZE", "256"))
DEFAULT_THREADS = int(os.environ.get("FAIRKC_THREADS", "0")) or available_workers()

# Fair algorithm parameterisation: lambda = scale / R_Scr
DEFAULT_LAMBDA_SCALES = (1.0, 4.0, 16.0)
LAMBDA_SCALE_NAMES = {1.0: "exact", 4.0: "medium", 16.0: "tight"}

# Scoring targets
DEFAULT_PAIR_CAP = 1.0
DEFAULT_COMMUNITY_DIVISOR = 4.0
FRAGMENT_THRESHOLDS = (1, 2, 3)

# Exhaustive oracle
BRUTEFORCE_LIMIT = int(os.environ.get("FAIRKC_BRUTEFORCE_LIMIT", str(10 ** 7)))

# Reports
REPORT_SIGNIFICANT_DIGITS = 6
