import sys
from pathlib import Path

import numpy as np
import pytest

from lastmile import Instance

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

WIDE = 1e6


def make_instance(n, arcs, windows=None, fleet=(9,), epsilon=0.0, service=None, coords=None):
    """Compact instance builder: `arcs` maps (i, j) -> seconds, symmetric
    fill unless the reverse arc is given, unspecified arcs get a large
    duration so they never help."""
    big = 1e5
    d = np.full((n + 2, n + 2), big)
    np.fill_diagonal(d, 0.0)
    d[:, n + 1] = 0.0
    d[n + 1, :] = 0.0
    for (i, j), v in arcs.items():
        d[i, j] = v
        if (j, i) not in arcs:
            d[j, i] = v
    w = np.zeros((n + 1, 2))
    w[1:, 1] = WIDE
    if windows:
        for i, (s, f) in windows.items():
            w[i] = (s, f)
    svc = None
    if service:
        svc = np.zeros(n + 1)
        for i, v in service.items():
            svc[i] = v
    return Instance(
        n=n, durations=d, epsilon=epsilon, windows=w, fleet=fleet,
        service=svc, coords=coords,
    )


@pytest.fixture
def line2():
    """Two customers on a line: d(0,1)=1, d(0,2)=2, d(1,2)=1."""
    return make_instance(2, {(0, 1): 1.0, (0, 2): 2.0, (1, 2): 1.0}, fleet=(2,))


@pytest.fixture
def chain3():
    """Three customers on the line 0-1-2-3 with unit edges."""
    pos = [0.0, 1.0, 2.0, 3.0]
    arcs = {(i, j): abs(pos[i] - pos[j]) for i in range(4) for j in range(4) if i != j}
    return make_instance(3, arcs, fleet=(3,))


@pytest.fixture
def rc2_paths():
    paths = sorted((DATA_DIR / "rc2").glob("rc_*.txt"))
    assert len(paths) == 5, "expected the five bundled RC2-derived subsets"
    return paths
