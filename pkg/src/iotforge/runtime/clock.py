"""Virtual time."""

from __future__ import annotations

import heapq
import itertools
from typing import Callable


class VirtualClock:
    """Event queue ordered by (time, enqueue sequence); time never goes back."""

    def __init__(self):
        self.now = 0
        self._queue: list = []
        self._seq = itertools.count()

    def schedule(self, at: int, action: Callable[[], None]):
        if at < self.now:
            raise ValueError(f"cannot schedule at {at} ms, clock is at {self.now} ms")
        heapq.heappush(self._queue, (at, next(self._seq), action))

    def after(self, delay: int, action: Callable[[], None]):
        self.schedule(self.now + delay, action)

    def __len__(self):
        return len(self._queue)

    def run(self, until=None):
        """Drain the queue; stop before the first event later than ``until``."""
        while self._queue:
            at = self._queue[0][0]
            if until is not None and at > until:
                break
            _, _, action = heapq.heappop(self._queue)
            self.now = at
            action()
