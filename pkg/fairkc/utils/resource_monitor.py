"""
Resource helpers for fairkc

Small psutil wrappers used to size the worker pool and to report how much
memory the dense distance matrices and trial batches take.
"""

import logging

import psutil

# Configure logging
logger = logging.getLogger(__name__)

# Scratch arrays of all workers together stay below 1 / SCRATCH_MEMORY_DIVISOR of free memory
SCRATCH_MEMORY_DIVISOR = 20


def available_workers() -> int:
    """
    Default number of worker threads for trial batches

    Returns:
        Physical core count (logical count as a fallback), at least 1
    """
    count = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return max(1, int(count))


def log_memory_footprint(label: str, nbytes: int) -> None:
    """
    Log the size of a large allocation next to the available memory

    Args:
        label: What was allocated
        nbytes: Size of the allocation in bytes
    """
    available = psutil.virtual_memory().available
    share = nbytes / available * 100 if available else 0.0
    logger.debug(f"{label}: {nbytes / 2 ** 20:.1f} MiB ({share:.2f}% of available memory)")
    if share > 50:
        logger.warning(f"{label} uses {share:.0f}% of available memory")


def scratch_items(item_bytes: int, ceiling: int) -> int:
    """
    How many items of a temporary array fit in a small share of free memory

    The share is split across the default worker count, since every worker
    holds its own scratch array.

    Args:
        item_bytes: Bytes per item
        ceiling: Upper bound on the returned count

    Returns:
        Item count between 1 and ceiling
    """
    budget = psutil.virtual_memory().available // (SCRATCH_MEMORY_DIVISOR * available_workers())
    return int(max(1, min(ceiling, budget // max(1, item_bytes))))
