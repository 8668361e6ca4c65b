"""
Ordered job execution for slices, grid cells and trials.

Jobs run on a thread pool when more than one thread is requested; results are
always returned in submission order so reductions do not depend on
scheduling.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional

from tqdm import tqdm

logger = logging.getLogger(__name__)


def run_jobs(func: Callable[[Any], Any], jobs: Iterable[Any], threads: int = 1,
             desc: Optional[str] = None, progress: bool = False) -> List[Any]:
    """
    Apply func to every job and collect results by job index

    Args:
        func: Callable applied to each job
        jobs: Job payloads
        threads: Worker count; 1 runs inline
        desc: Progress bar label
        progress: Show a tqdm progress bar

    Returns:
        list: One result per job, in job order
    """
    jobs = list(jobs)
    if threads is None or threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")

    bar = tqdm(total=len(jobs), desc=desc, disable=not progress, leave=False)
    try:
        if threads == 1 or len(jobs) <= 1:
            results = []
            for job in jobs:
                results.append(func(job))
                bar.update(1)
            return results

        logger.debug(f"Running {len(jobs)} jobs on {threads} threads ({desc or 'jobs'})")
        ordered: List[Any] = [None] * len(jobs)
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = {executor.submit(func, job): index for index, job in enumerate(jobs)}
            for future, index in futures.items():
                # Raises the first failing job's error in job order
                ordered[index] = future.result()
                bar.update(1)
        return ordered
    finally:
        bar.close()
