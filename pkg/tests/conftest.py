import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from gen import std_sig, struct_sig  # noqa: E402


@pytest.fixture(scope="session")
def sig():
    """Shared symmetric signature with a spread of generator shapes."""
    return std_sig()


@pytest.fixture(scope="session")
def msig():
    """Monoidal-level signature of bare objects (no braiding allowed)."""
    return struct_sig()


@pytest.fixture(scope="session")
def golden_dir():
    return Path(__file__).resolve().parent / "golden"
