import pytest

from evcluster.model import Event, SensorGeometry
from evcluster.synth import SplitMix64

_acceptance = []


@pytest.fixture
def record_criterion():
    """Call as ``record_criterion(number, passed, detail)`` from an acceptance test."""
    def record(number, passed, detail=""):
        _acceptance.append((number, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_acceptance, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")


def random_stream(seed, n_events, geom=SensorGeometry(8, 8), max_gap=300, polarity=False):
    """Unstructured random stream: uniform pixels, random non-negative gaps."""
    rng = SplitMix64(seed)
    t = 0
    out = []
    for _ in range(n_events):
        t += rng.below(max_gap + 1)
        p = rng.polarity() if polarity else 1
        out.append(Event(t, rng.below(geom.width), rng.below(geom.height), p))
    return out


@pytest.fixture
def geom64():
    return SensorGeometry(64, 64)
