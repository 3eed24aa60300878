from __future__ import annotations

import numpy as np
import pytest

from elastiq.fields import DisplacementField, FourierMode


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


def real_field(rng: np.random.Generator, n: int = 2, amp: float = 0.05, compact: bool = True) -> DisplacementField:
    modes = []
    for _ in range(n):
        q3 = float(rng.integers(-1, 2)) if compact else 0.0
        q = (rng.uniform(-1, 1), rng.uniform(-1, 1), q3)
        a = amp * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
        modes.append(FourierMode(q, a))
    return DisplacementField.from_modes(modes + [m.conjugate() for m in modes], real=True)


def central_diff(f, p, h=1e-5):
    """Gradient of a vector function by central differences; [component, direction]."""
    p = np.asarray(p, dtype=float)
    cols = []
    for k in range(len(p)):
        e = np.zeros(len(p))
        e[k] = h
        cols.append((np.asarray(f(p + e)) - np.asarray(f(p - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok, detail in sorted(RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d} {title}: {detail}")
