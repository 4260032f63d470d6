import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).resolve().parent
SAMPLES = HERE.parent / "samples"
sys.path.insert(0, str(HERE))

from lithium.parser import parse_base  # noqa: E402


def load(name: str):
    return parse_base((SAMPLES / f"{name}.lith").read_text())


def query(name: str, qname: str | None = None):
    _, qs = load(name)
    return qs[0] if qname is None else next(q for q in qs if q.name == qname)


@pytest.fixture
def samples_dir():
    return SAMPLES
