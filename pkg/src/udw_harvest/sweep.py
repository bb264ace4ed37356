"""Row-wise parameter sweeps with per-row failure capture."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

log = logging.getLogger(__name__)


@dataclass
class SweepRow:
    point: Any
    result: Any = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_one(fn, point, spec):
    try:
        return SweepRow(point, fn(point, spec))
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        log.warning("sweep point %r failed: %s", point, exc)
        return SweepRow(point, None, f"{type(exc).__name__}: {exc}")


def run_rows(fn, points, spec, jobs: int = 1):
    """Apply ``fn(point, spec)`` to every point; failures become rows with ``error`` set."""
    if jobs <= 1 or len(points) <= 1:
        return [_run_one(fn, p, spec) for p in points]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futs = [pool.submit(_run_one, fn, p, spec) for p in points]
        return [f.result() for f in futs]
