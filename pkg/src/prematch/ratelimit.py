"""Sliding-window request throttling with an injectable clock."""

from __future__ import annotations

import threading
import time
from collections import deque


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class VirtualClock:
    """Deterministic clock for tests: sleeping advances time instantly."""

    def __init__(self, start: float = 0.0) -> None:
        self._t = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._t

    def sleep(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot sleep a negative duration")
        with self._lock:
            self._t += seconds


class SlidingWindowLimiter:
    """Enforces one or more (max_requests, window_seconds) limits.

    ``acquire`` blocks (via the clock) until issuing a request keeps every
    window within its budget, then records the request. A request at time t
    counts against a window of length w for all instants in [t, t + w).
    Thread-safe.
    """

    def __init__(self, limits: list[tuple[int, float]], clock=None) -> None:
        for max_requests, window in limits:
            if max_requests <= 0 or window <= 0:
                raise ValueError(f"limits must be positive, got ({max_requests}, {window})")
        self._limits = list(limits)
        self._clock = clock if clock is not None else SystemClock()
        self._history: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Block until a request slot is free; returns the recorded timestamp."""
        while True:
            with self._lock:
                now = self._clock.now()
                self._prune(now)
                wait = self._wait_needed(now)
                if wait is None:
                    self._history.append(now)
                    return now
            # small bump so float rounding can never land exactly on the
            # window boundary and record one request early
            self._clock.sleep(wait + 1e-9)

    def _prune(self, now: float) -> None:
        horizon = max(window for _, window in self._limits)
        while self._history and now - self._history[0] >= horizon:
            self._history.popleft()

    def _wait_needed(self, now: float) -> float | None:
        """None when a request may be issued now, else seconds until retry."""
        wait = None
        for max_requests, window in self._limits:
            in_window = [t for t in self._history if now - t < window]
            if len(in_window) >= max_requests:
                # oldest blocking request must age out of the window first
                oldest = in_window[len(in_window) - max_requests]
                needed = max(0.0, oldest + window - now)
                wait = needed if wait is None else max(wait, needed)
        return wait

    def timestamps(self) -> list[float]:
        """Recorded request times still inside the largest window (for tests)."""
        with self._lock:
            return list(self._history)
