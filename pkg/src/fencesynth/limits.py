"""Run-wide resource limits shared by the enumerator, the analyses and the driver."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .errors import ResourceLimitError


@dataclass
class Limits:
    """Budget for one synthesis run.

    ``max_traces`` bounds how many consistent executions the enumerator may
    produce, ``timeout_secs`` is a global soft deadline (armed by ``start``),
    ``max_cycles`` bounds elementary-cycle enumeration per trace,
    ``coalesce_budget`` bounds the cross-trace order-coalescing product and
    ``max_iters`` bounds the iterative (one-trace-at-a-time) driver loop.
    """

    max_traces: int | None = None
    timeout_secs: float | None = None
    max_cycles: int = 200_000
    coalesce_budget: int = 20_000
    max_iters: int = 64
    _deadline: float | None = field(default=None, repr=False)

    def start(self) -> "Limits":
        """Arm the wall-clock deadline; returns self for chaining."""
        if self.timeout_secs is not None:
            self._deadline = time.monotonic() + self.timeout_secs
        else:
            self._deadline = None
        return self

    def check_time(self, phase: str) -> None:
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise ResourceLimitError(phase, "timeout")


def ensure_started(limits: Limits | None) -> Limits:
    """Arm a fresh deadline unless the caller already did."""
    if limits is None:
        return Limits().start()
    if limits._deadline is None:
        limits.start()
    return limits
