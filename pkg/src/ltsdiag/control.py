"""Cooperative cancellation shared by long-running explorations."""

from __future__ import annotations

import threading


class CheckCancelled(RuntimeError):
    """Raised inside a check that observed its cancellation signal."""


class CancelToken:
    """Thread-safe one-shot cancellation signal, polled between batches."""

    __slots__ = ("_event",)

    def __init__(self):
        self._event = threading.Event()

    def cancel(self) -> None:
        self._event.set()

    def cancelled(self) -> bool:
        return self._event.is_set()

    def checkpoint(self) -> None:
        if self._event.is_set():
            raise CheckCancelled()


POLL_MASK = 0xFF  # poll the token every 256 expansion steps
