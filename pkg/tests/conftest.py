import json

import pytest

import factories


@pytest.fixture
def write_system(tmp_path):
    """Write a system file from a header dict and a list of term lists."""

    def _write(header, polys, name="system.jsonl"):
        path = tmp_path / name
        lines = [json.dumps(header)] + [json.dumps(p) for p in polys]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def two_solution_f2():
    return factories.two_solution_f2()


@pytest.fixture
def unique_c_system():
    return factories.unique_c_system()
