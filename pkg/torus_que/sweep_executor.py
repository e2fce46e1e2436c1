"""
Sweep Executor - Runs independent N-rows of a sweep on worker threads
"""

import queue
import threading
from collections.abc import Callable, Iterable
from typing import TypeVar

from torus_que.constants import DEFAULT_WORKERS
from torus_que.errors import SweepCancelledError
from torus_que.logger import get_logger

logger = get_logger(__name__)

RowT = TypeVar("RowT")


class SweepExecutor:
    """Executes one measurement per N on a pool of threads

    Rows are keyed by N, so the returned mapping does not depend on the order
    in which workers finish.
    """

    def __init__(
        self,
        workers: int = DEFAULT_WORKERS,
        output_queue: "queue.Queue[tuple] | None" = None,
    ) -> None:
        """Initialize the sweep executor

        Args:
            workers: Number of worker threads
            output_queue: Optional queue receiving ("status", text) and
                ("row_finished", N) progress messages
        """
        if workers < 1:
            raise ValueError(f"workers must be positive, got {workers}")
        self.workers = workers
        self.output_queue = output_queue

        self.state_lock = threading.Lock()
        self.is_running = False
        self.cancel_requested = False

    def _notify(self, kind: str, payload: object) -> None:
        if self.output_queue is not None:
            self.output_queue.put((kind, payload))

    def cancel(self) -> bool:
        """Ask workers to stop after their current row

        Returns:
            True if a sweep was running, False otherwise
        """
        with self.state_lock:
            if not self.is_running:
                return False
            self.cancel_requested = True
        self._notify("status", "Cancellation requested")
        return True

    def is_sweep_running(self) -> bool:
        with self.state_lock:
            return self.is_running

    def _should_stop(self) -> bool:
        with self.state_lock:
            return self.cancel_requested

    def run(
        self, dims: Iterable[int], measure: Callable[[int], RowT]
    ) -> dict[int, RowT]:
        """Call measure(N) for every N and return {N: row} sorted by N

        The first exception raised by a worker stops the sweep and is
        re-raised here.
        """
        todo: queue.Queue[int] = queue.Queue()
        ordered = sorted(set(dims))
        for n in ordered:
            todo.put(n)

        results: dict[int, RowT] = {}
        results_lock = threading.Lock()
        errors: list[BaseException] = []

        def worker() -> None:
            while not self._should_stop():
                try:
                    n = todo.get_nowait()
                except queue.Empty:
                    return
                try:
                    row = measure(n)
                except Exception as e:
                    logger.error(f"Row N={n} failed: {e}")
                    with results_lock:
                        errors.append(e)
                    with self.state_lock:
                        self.cancel_requested = True
                    return
                with results_lock:
                    results[n] = row
                logger.debug(f"Row N={n} finished")
                self._notify("row_finished", n)

        with self.state_lock:
            self.is_running = True
            self.cancel_requested = False
        self._notify("status", f"Running {len(ordered)} rows on {self.workers} workers")

        threads = [
            threading.Thread(target=worker, name=f"sweep-{i}", daemon=True)
            for i in range(min(self.workers, max(len(ordered), 1)))
        ]
        try:
            for thread in threads:
                thread.start()
            for thread in threads:
                thread.join()
        finally:
            with self.state_lock:
                self.is_running = False
                cancelled = self.cancel_requested
                self.cancel_requested = False

        if errors:
            raise errors[0]
        if cancelled and len(results) < len(ordered):
            raise SweepCancelledError(
                f"sweep cancelled after {len(results)} of {len(ordered)} rows"
            )
        self._notify("status", "Sweep finished")
        return dict(sorted(results.items()))
