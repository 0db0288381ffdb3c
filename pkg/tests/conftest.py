import numpy as np
import pytest

from foldcusp.families import FoldCuspParams, make_invisible_family, make_visible_family


def fd_lie(W, f, p, k, h=1e-4):
    """Iterated Lie derivative from central differences (oracle only)."""

    def L(order, x, y):
        if order == 0:
            return float(f(x, y))
        w = W.value(x, y)
        gx = (L(order - 1, x + h, y) - L(order - 1, x - h, y)) / (2 * h)
        gy = (L(order - 1, x, y + h) - L(order - 1, x, y - h)) / (2 * h)
        return gx * float(w[0]) + gy * float(w[1])

    return L(k, float(p[0]), float(p[1]))


@pytest.fixture(scope="session")
def inv_1_1():
    return make_invisible_family(FoldCuspParams(0.0, -1.0, 0.0))


@pytest.fixture(scope="session")
def inv_two_fold():
    return make_invisible_family(FoldCuspParams(1.0, 1.0, 0.0))


@pytest.fixture(scope="session")
def vis_9b():
    return make_visible_family(0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _representatives(beta, mu):
    """One ``lam`` per case label: every boundary value and every midpoint between them."""
    from foldcusp.bifurcation import boundary_values

    vals = [v for _, v, _ in boundary_values(beta, mu)]
    pts = [vals[0] - 0.05]
    for i, v in enumerate(vals):
        pts.append(v)
        pts.append(0.5 * (v + vals[i + 1]) if i + 1 < len(vals) else v + 0.05)
    return pts


@pytest.fixture(scope="session")
def representatives():
    return _representatives


_AC_LINES = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _AC_LINES.extend(l for l in report.capstdout.splitlines() if l.startswith("AC"))


def pytest_terminal_summary(terminalreporter):
    if _AC_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_AC_LINES, key=lambda l: int(l[2:].split()[0])):
            terminalreporter.write_line(line)
