from __future__ import annotations

import json

import pytest

from .result_writer import ResultWriter


def test_write_csv(tmp_path):
    path = ResultWriter().write_csv(tmp_path / "runs" / "a.csv", ["t", "r_1"], [["0", "1"], ["1", "2"]])
    assert path.read_text(encoding="utf-8") == "t,r_1\n0,1\n1,2\n"
    assert sorted(p.name for p in path.parent.iterdir()) == ["a.csv"]


def test_write_json_is_stable(tmp_path):
    writer = ResultWriter()
    payload = {"max_deviation": 1.5e-16, "times_checked": 3, "n": 2, "m": 1}
    first = writer.write_json(tmp_path / "a.json", payload).read_bytes()
    second = writer.write_json(tmp_path / "a.json", payload).read_bytes()
    assert first == second
    assert json.loads(first) == payload
    assert first.endswith(b"}\n")


def test_failed_write_leaves_nothing_behind(tmp_path):
    def rows():
        yield ["0", "1"]
        raise RuntimeError("integration aborted")

    with pytest.raises(RuntimeError):
        ResultWriter().write_csv(tmp_path / "a.csv", ["t", "r_1"], rows())
    assert list(tmp_path.iterdir()) == []
