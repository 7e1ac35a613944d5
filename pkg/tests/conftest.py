import math

import numpy as np
import pytest

from pegf.catalog import Custom, Exponential, GeneralizedPower, LeftExponential, Power, Uniform

# one representative of every family, with an interior t grid for each
FAMILIES = {
    "uniform": (Uniform(0.0, 2.0), np.linspace(0.1, 2.0, 10)),
    "uniform_shifted": (Uniform(-1.0, 3.0), np.linspace(-0.8, 2.9, 10)),
    "power2": (Power(2.0), np.linspace(0.05, 1.0, 10)),
    "power0.7": (Power(0.7), np.linspace(0.05, 1.0, 10)),
    "exponential": (Exponential(1.0), np.linspace(0.1, 6.0, 10)),
    "exponential_mu2.5": (Exponential(2.5), np.linspace(0.2, 10.0, 10)),
    "genpower": (GeneralizedPower(0.25, 0.0, 1.0), np.linspace(0.05, 1.0, 10)),
    "genpower_shifted": (GeneralizedPower(0.4, 0.6, 2.0), np.linspace(-1.3, 2.0, 10)),
    "leftexp": (LeftExponential(1.5, 0.0), np.linspace(-4.0, 0.0, 10)),
}


def triangle_density(x):
    return 2.0 * (1.0 - x) if 0.0 <= x <= 1.0 else 0.0


def ramp_density(x):
    return 0.5 * x if 0.0 <= x <= 2.0 else 0.0


@pytest.fixture(params=sorted(FAMILIES))
def family(request):
    return FAMILIES[request.param]


def rel_close(a, b, rel, abs_=0.0):
    return abs(a - b) <= max(abs_, rel * max(abs(a), abs(b)))


def finite(x):
    return math.isfinite(x)


# one "criterion N: PASS|FAIL ..." line per acceptance check, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
