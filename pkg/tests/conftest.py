import os
import sys

import pytest
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from chiralwalk.notation import Cycle, DiCycle, Handles, Join, Merge, Path  # noqa: E402

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=100
)
settings.load_profile("default")


@st.composite
def dicycles(draw):
    n = draw(st.integers(4, 8))
    a = draw(st.integers(1, n - 2))
    b = draw(st.integers(a + 2, n))
    if a == 1 and b == n:
        b = n - 1
    return DiCycle(n, a, b)


atoms = st.one_of(
    st.builds(Path, st.integers(1, 5)),
    st.builds(Cycle, st.integers(3, 8)),
    dicycles(),
)

specs = st.recursive(
    atoms,
    lambda inner: st.one_of(
        st.builds(Handles, inner),
        st.builds(Join, inner, inner),
        st.builds(Merge, inner, inner),
    ),
    max_leaves=6,
)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request):
    """``record(number, title, checks, elapsed, budget)`` logs one line and asserts."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number, title, checks, elapsed, budget):
        checks = list(checks) + [(f"runtime {elapsed:.2f}s < {budget:g}s", elapsed < budget)]
        ok = all(passed for _, passed in checks)
        failed = [name for name, passed in checks if not passed]
        detail = "; ".join(name if passed else f"[fails] {name}" for name, passed in checks)
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}: {detail}"
        lines.append((number, line))
        print(line)
        assert ok, f"criterion {number} failed: {'; '.join(failed)}"

    return record
