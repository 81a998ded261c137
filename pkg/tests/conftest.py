from __future__ import annotations

import functools

import pytest

from heteronet import build, build_graph, calibrate_epsilon


@functools.lru_cache(maxsize=None)
def calibrated(n: int, mode: str = "auto"):
    draft = build(n, 1.0, mode)
    return draft.with_epsilon(calibrate_epsilon(draft))


@functools.lru_cache(maxsize=None)
def graph(n: int):
    return build_graph(n)


@pytest.fixture
def spec3():
    return calibrated(3)


@pytest.fixture
def spec4():
    return calibrated(4)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
