# -*- coding: utf-8 -*-
import logging
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence

log = logging.getLogger(__name__)


class Worker:
    """Single job of a sweep; subclasses implement `execute`."""

    label: str = None

    def execute(self):
        raise NotImplementedError("Please implement this method!")

    def run(self):
        try:
            return self.execute()
        except Exception as e:
            log.debug(traceback.format_exc())
            log.error("Worker %s failed: %s", self.label or self, e)
            raise e


class CallWorker(Worker):
    """Worker calling `function(*args)`."""

    def __init__(self, function: Callable, *args, label: str = None):
        self.function = function
        self.args = args
        self.label = label

    def execute(self):
        return self.function(*self.args)


def get_worker_count(workers: Optional[int] = None) -> int:
    if workers:
        return workers
    return min(32, os.cpu_count() or 1)


def run_workers(
    workers: Sequence[Worker], max_workers: Optional[int] = None
) -> List[Any]:
    """Run workers in a thread pool and return results in input order.

    The first failing worker re-raises its exception once the pool has
    drained.
    """
    workers = list(workers)
    if not workers:
        return []
    count = min(get_worker_count(max_workers), len(workers))
    if count == 1:
        return [worker.run() for worker in workers]
    log.debug("Running %d jobs on %d threads", len(workers), count)
    with ThreadPoolExecutor(max_workers=count) as executor:
        futures = [executor.submit(worker.run) for worker in workers]
    return [future.result() for future in futures]


def map_in_pool(
    function: Callable,
    items: Sequence,
    max_workers: Optional[int] = None,
) -> List[Any]:
    return run_workers(
        [CallWorker(function, item) for item in items], max_workers
    )
