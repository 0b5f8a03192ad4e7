import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from robust_lsq import _backend  # noqa: E402
from robust_lsq.batch_model import MiniBatch  # noqa: E402


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run the test once per available kernel backend."""
    with _backend.use_backend(request.param) as mod:
        yield mod


def make_batch(p, n, seed=0, sigma=0.0, beta=None, bid=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((p, n))
    if beta is None:
        beta = rng.standard_normal(p)
    y = x.T @ beta + sigma * rng.standard_normal(n)
    return MiniBatch(x, y, bid), np.asarray(beta, dtype=float)


def ball_point(rng, center, radius):
    """Uniform draw from the closed ball of ``radius`` around ``center``."""
    d = rng.standard_normal(center.size)
    d /= np.linalg.norm(d)
    return center + radius * rng.uniform() ** (1.0 / center.size) * d


def majority_pool(rng, p, m, eps, max_norm=1e6):
    """Estimates with at least ``m // 2 + 1`` inside ``B(beta*, eps)``; the rest adversarial.

    Returns ``(beta_star, estimates)`` with rows in random order. The
    adversaries are drawn from a mix of strategies: far away, clustered
    just outside the ball, or piled on a single point.
    """
    beta = rng.standard_normal(p)
    good = rng.integers(m // 2 + 1, m + 1)
    rows = [ball_point(rng, beta, eps) for _ in range(good)]
    bad = m - good
    mode = rng.integers(3)
    if mode == 0:
        for _ in range(bad):
            d = rng.standard_normal(p)
            rows.append(d / np.linalg.norm(d) * rng.uniform(0, max_norm))
    elif mode == 1:
        d = rng.standard_normal(p)
        d /= np.linalg.norm(d)
        for _ in range(bad):
            rows.append(ball_point(rng, beta + d * eps * rng.uniform(1.0, 4.0), 0.5 * eps))
    else:
        anchor = beta + rng.standard_normal(p) * eps * rng.uniform(1.0, 10.0)
        rows.extend(anchor.copy() for _ in range(bad))
    rows = np.array(rows)
    return beta, rows[rng.permutation(m)]


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, ok, detail)``."""
    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        _CRITERIA[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
