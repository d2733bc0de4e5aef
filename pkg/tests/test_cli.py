"""CLI and serve tests: exit codes, determinism, env override, endpoints."""

from __future__ import annotations

import json
import math
import threading
import urllib.error
import urllib.request
from http.server import ThreadingHTTPServer

import pytest

from realslice import cli
from realslice import expr as ex
from realslice import roots as rt
from realslice import slicer as sl
from realslice.export import write_document


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_slice_writes_document(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, _, _ = run_cli(
        capsys,
        "slice", "--expr", "sin(z)+2", "--window", "-6.2832:6.2832:-3:3",
        "--grid", "64", "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_bytes())
    assert payload["format_version"] == "1"
    assert len(payload["branches"]) == 5


def test_slice_obj_and_csv_formats(tmp_path, capsys):
    obj = tmp_path / "s.obj"
    code, _, _ = run_cli(
        capsys, "slice", "--expr", "sin(z)", "--grid", "32",
        "--format", "obj", "--out", str(obj),
    )
    assert code == 0
    assert obj.read_text().splitlines()[0].startswith("#")
    code, _, _ = run_cli(
        capsys, "slice", "--expr", "sin(z)", "--grid", "32",
        "--format", "csv", "--out", str(tmp_path / "s.csv"),
    )
    assert code == 0
    assert (tmp_path / "s.branch000.csv").read_text().startswith("x,y,v")


def test_roots_prints_euler_rows(capsys):
    code, out, _ = run_cli(
        capsys,
        "roots", "--expr", "exp(z)+1", "--target", "0",
        "--window", "-2:2:-7:7", "--grid", "64",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("re\tim")
    assert len(lines) == 3
    ims = sorted(float(line.split("\t")[1]) for line in lines[1:])
    res = [float(line.split("\t")[0]) for line in lines[1:]]
    assert abs(ims[0] + math.pi) < 1e-9 and abs(ims[1] - math.pi) < 1e-9
    assert all(abs(r) < 1e-9 for r in res)


def test_invalid_window_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "slice", "--expr", "sin(z)", "--window", "5:1:0:1")
    assert code == 1
    assert "window" in err


def test_bad_expression_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "slice", "--expr", "sin(")
    assert code == 1
    assert "expression" in err


def test_masked_window_is_computation_error(capsys):
    code, _, err = run_cli(
        capsys, "slice", "--expr", "exp(z)", "--window", "40:50:0:1", "--grid", "16"
    )
    assert code == 2
    assert "nowhere" in err


def test_unknown_grid_is_usage_error(capsys):
    code, _, _ = run_cli(capsys, "slice", "--expr", "sin(z)", "--grid", "7")
    assert code == 1
    code, _, _ = run_cli(capsys, "slice", "--expr", "sin(z)", "--grid", "9000")
    assert code == 1


def test_identical_argv_identical_bytes(tmp_path, capsys):
    args = ["slice", "--expr", "cosh(z)", "--window", "-2:2:-7:7", "--grid", "64"]
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        code, _, _ = run_cli(capsys, *args, "--out", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_grid_env_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("REALSLICE_GRID", "32")
    out = tmp_path / "s.json"
    code, _, _ = run_cli(capsys, "slice", "--expr", "sin(z)", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_bytes())
    assert payload["grid"]["nx"] == 32


def test_catalog_subcommand(capsys):
    code, out, _ = run_cli(capsys, "catalog", "--function", "sec")
    assert code == 0
    lines = out.strip().splitlines()
    assert any("sech(t)" in line for line in lines)
    assert any(line.startswith("real-axis") for line in lines)


def test_verify_subcommand_fast_grid(capsys):
    code, out, _ = run_cli(capsys, "verify", "--grid", "64")
    assert code == 0
    assert "checks passed" in out
    assert "FAIL" not in out


# ---------------------------------------------------------------------------
# serve


@pytest.fixture()
def server(tmp_path):
    static = tmp_path / "dist"
    static.mkdir()
    (static / "index.html").write_text("<html>viewer</html>")
    srv = ThreadingHTTPServer(("127.0.0.1", 0), cli.make_handler(str(static)))
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{srv.server_address[1]}"
    srv.shutdown()
    srv.server_close()


def _get(url: str):
    with urllib.request.urlopen(url) as resp:
        return resp.status, resp.read()


def test_serve_slice_matches_library_output(server):
    status, body = _get(f"{server}/api/slice?expr=sin(z)&window=-1:1:-1:1&grid=32")
    assert status == 200
    e = ex.parse("sin(z)")
    s = sl.extract_slice(e, sl.Window(-1, 1, -1, 1), sl.GridSpec(nx=32, ny=32))
    assert body == write_document(s)


def test_serve_roots_document(server):
    status, body = _get(
        f"{server}/api/roots?expr=exp(z)%2B1&target=0&window=-2:2:-7:7&grid=64"
    )
    assert status == 200
    payload = json.loads(body)
    ys = sorted(r["im"] for r in payload["roots"])
    assert len(ys) == 2
    assert abs(ys[0] + math.pi) < 1e-9 and abs(ys[1] - math.pi) < 1e-9
    e = ex.parse("exp(z)+1")
    s = sl.extract_slice(e, sl.Window(-2, 2, -7, 7), sl.GridSpec(nx=64, ny=64))
    assert body == write_document(s, rt.solve_level(e, 0.0, s))


def test_serve_static_and_errors(server):
    status, body = _get(f"{server}/")
    assert status == 200 and b"viewer" in body
    with pytest.raises(urllib.error.HTTPError) as err:
        _get(f"{server}/api/slice?expr=sin(")
    assert err.value.code == 400
    assert "error" in json.loads(err.value.read())
    with pytest.raises(urllib.error.HTTPError) as err:
        _get(f"{server}/nope.js")
    assert err.value.code == 404
    with pytest.raises(urllib.error.HTTPError) as err:
        _get(f"{server}/api/slice")
    assert err.value.code == 400


def test_serve_concurrent_requests(server):
    results = {}

    def fetch(key, url):
        results[key] = _get(url)

    threads = [
        threading.Thread(
            target=fetch, args=(k, f"{server}/api/slice?expr=sin(z)&window=-1:1:-1:1&grid=32")
        )
        for k in range(3)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    bodies = {results[k][1] for k in results}
    assert len(bodies) == 1  # concurrent identical requests agree bytewise
    assert all(results[k][0] == 200 for k in results)
