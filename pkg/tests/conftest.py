import sys
from pathlib import Path

import numpy as np
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from mclearn.hypothesis import HypothesisClass  # noqa: E402


@st.composite
def small_classes(draw, max_d=3, max_k=3, max_size=8, min_k=1):
    d = draw(st.integers(1, max_d))
    k = draw(st.integers(min_k, max_k))
    n = draw(st.integers(1, max_size))
    rows = draw(st.lists(st.lists(st.integers(0, k - 1), min_size=d, max_size=d), min_size=n, max_size=n))
    return HypothesisClass(np.array(rows), k)


@st.composite
def samples_for(draw, H, max_len=4, realizable=False):
    n = draw(st.integers(0, max_len))
    xs = draw(st.lists(st.integers(0, H.d - 1), min_size=n, max_size=n))
    if realizable:
        f = H.table[draw(st.integers(0, len(H) - 1))]
        return [(x, int(f[x])) for x in xs]
    ys = draw(st.lists(st.integers(0, H.k - 1), min_size=n, max_size=n))
    return list(zip(xs, ys))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
