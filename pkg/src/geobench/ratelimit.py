"""Client-side token bucket for polite use of remote geoparsing services."""

from __future__ import annotations

import threading
import time
from typing import Callable

# tolerance against float absorption: after sleeping exactly the computed
# wait, the refilled balance can land at 1 - O(1e-16) and another sleep of
# the residual would be too small to advance the clock at all
_EPSILON = 1e-9


class TokenBucket:
    """Classic token bucket: capacity `burst`, refilled at `rate_per_hour`.

    `acquire()` blocks (by calling the injected sleep) until a token is
    available, so callers can simply wrap each request in one acquire. The
    clock and sleep functions are injectable for tests.
    """

    def __init__(
        self,
        rate_per_hour: float,
        burst: int = 1,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate_per_hour <= 0:
            raise ValueError(f"rate_per_hour must be positive, got {rate_per_hour}")
        if burst < 1:
            raise ValueError(f"burst must be >= 1, got {burst}")
        self._rate_per_sec = rate_per_hour / 3600.0
        self._capacity = float(burst)
        self._tokens = float(burst)
        self._clock = clock
        self._sleep = sleep
        self._updated = clock()
        self._lock = threading.Lock()

    def _refill(self) -> None:
        now = self._clock()
        elapsed = now - self._updated
        if elapsed > 0:
            self._tokens = min(self._capacity, self._tokens + elapsed * self._rate_per_sec)
            self._updated = now

    def try_acquire(self) -> bool:
        with self._lock:
            self._refill()
            if self._tokens >= 1.0 - _EPSILON:
                self._tokens -= 1.0
                return True
            return False

    def acquire(self) -> None:
        while True:
            with self._lock:
                self._refill()
                if self._tokens >= 1.0 - _EPSILON:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self._rate_per_sec
            # sleep outside the lock so other threads can race for the token
            self._sleep(wait)
