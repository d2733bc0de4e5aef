"""Serialization tests: canonical document round-trip, OBJ and CSV forms."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from realslice import expr as ex
from realslice import export as xp
from realslice import roots as rt
from realslice import slicer as sl

from conftest import STD_WINDOW, cached_slice


def _tiny_sliceset(branches) -> sl.SliceSet:
    return sl.SliceSet(
        expression="sin(z)",
        window=sl.Window(-1, 1, -1, 1),
        grid=sl.GridSpec(nx=8, ny=8),
        branches=branches,
        diagnostics={"cells": 100, "masked_cells": 100, "singular_cells": 0},
    )


def test_document_round_trip_is_byte_identical():
    s = cached_slice("sin(z)+2", STD_WINDOW, nx=64)
    roots = rt.solve_level(ex.parse("sin(z)+2"), 0.0, s)
    data = xp.write_document(s, roots)
    doc = xp.read_document(data)
    assert xp.document_bytes(doc) == data
    # and once more through the loop
    assert xp.document_bytes(xp.read_document(xp.document_bytes(doc))) == data


def test_document_empty_sliceset():
    data = xp.write_document(_tiny_sliceset([]))
    payload = json.loads(data)
    assert payload["branches"] == []
    assert payload["diagnostics"]["masked_cells"] == 100
    assert payload["format_version"] == "1"
    assert xp.document_bytes(xp.read_document(data)) == data


def test_document_branch_kinds_for_sin():
    s = cached_slice("sin(z)", STD_WINDOW, nx=64)
    payload = json.loads(xp.write_document(s))
    kinds = [b["kind"] for b in payload["branches"]]
    assert kinds == ["real-axis"] + ["vertical-line"] * 4


def test_document_rejects_other_versions():
    data = xp.write_document(_tiny_sliceset([]))
    payload = json.loads(data)
    payload["format_version"] = "2"
    with pytest.raises(xp.DocumentError, match="format_version"):
        xp.read_document(json.dumps(payload).encode())


def test_document_rejects_ragged_points():
    data = xp.write_document(cached_slice("sin(z)", STD_WINDOW, nx=64))
    payload = json.loads(data)
    payload["branches"][0]["points"]["x"].append(0.0)
    with pytest.raises(xp.DocumentError):
        xp.read_document(json.dumps(payload).encode())


def test_document_keys_sorted_and_ascii():
    data = xp.write_document(cached_slice("sin(z)", STD_WINDOW, nx=64))
    text = data.decode("ascii")
    payload = json.loads(text)
    assert list(payload.keys()) == sorted(payload.keys())
    assert text.endswith("\n")


def test_obj_body_exact():
    branch = sl.Branch(
        "real-axis", None, np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.84]]), False
    )
    text = xp.write_polylines(_tiny_sliceset([branch]))
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    assert body + "\n" == "v 0 0 0\nv 1 0 0.84\nl 1 2\n"


def test_obj_empty_body():
    text = xp.write_polylines(_tiny_sliceset([]))
    assert all(line.startswith("#") for line in text.splitlines())


def test_obj_vertex_conservation_and_index_validity():
    s = cached_slice("cosh(z)", (-2.0, 2.0, -7.0, 7.0), nx=64)
    text = xp.write_polylines(s)
    vlines = [l for l in text.splitlines() if l.startswith("v ")]
    llines = [l for l in text.splitlines() if l.startswith("l ")]
    total = sum(len(b.points) for b in s.branches)
    assert len(vlines) == total
    assert len(llines) == len(s.branches)
    for line in llines:
        ids = [int(tok) for tok in line.split()[1:]]
        assert all(1 <= i <= total for i in ids)
    # closed branches repeat their first vertex index at the end
    for b, line in zip(s.branches, llines):
        ids = [int(tok) for tok in line.split()[1:]]
        assert len(ids) == len(b.points) + (1 if b.closed else 0)


def test_csv_per_branch():
    s = cached_slice("sin(z)", STD_WINDOW, nx=64)
    texts = xp.write_csv(s)
    assert len(texts) == len(s.branches)
    for text, b in zip(texts, s.branches):
        lines = text.strip().splitlines()
        assert lines[0] == "x,y,v"
        assert len(lines) == len(b.points) + 1
        x, y, v = (float(tok) for tok in lines[1].split(","))
        assert (x, y, v) == tuple(b.points[0])


def test_float_format_locale_independent():
    import locale

    s = cached_slice("sin(z)", STD_WINDOW, nx=64)
    before = xp.write_document(s)
    set_to = None
    for name in ("de_DE.UTF-8", "fr_FR.UTF-8", "de_DE", "fr_FR"):
        try:
            locale.setlocale(locale.LC_NUMERIC, name)
            set_to = name
            break
        except locale.Error:
            continue
    if set_to is None:
        pytest.skip("no comma-decimal locale installed")
    try:
        assert xp.write_document(s) == before
        assert xp.write_polylines(s) == xp.write_polylines(s)
    finally:
        locale.setlocale(locale.LC_NUMERIC, "C")


def test_float_format_shortest_round_trip():
    # values survive the document exactly
    branch = sl.Branch(
        "implicit-curve",
        None,
        np.array([[0.1, -2.5e-7, 1.2345678901234567], [math.pi, 1e300, -0.0]]),
        False,
    )
    data = xp.write_document(_tiny_sliceset([branch]))
    doc = xp.read_document(data)
    assert np.array_equal(doc.branches[0].points, branch.points)
