# conftest.py
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core import calculus as lc  # noqa: E402


@pytest.fixture
def reader_sig():
    return lc.Signature.of(params={"p": "int4", "q": "bool"})


@pytest.fixture
def memory_sig():
    return lc.Signature.of(regions={"r": "int4"})


@pytest.fixture
def trace_sig():
    return lc.Signature.of(tags={"a": "unit", "b": "bool"})
