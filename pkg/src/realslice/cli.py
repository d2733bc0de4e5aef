"""Command-line interface and local HTTP service.

Subcommands: slice (extract curves, write document/OBJ/CSV), roots
(solve f(z) = w on the slice), catalog (closed-form branches), verify
(oracle-agreement suite), serve (HTTP API plus static viewer bundle).

Exit codes: 0 success, 1 usage error, 2 computation error, 3 verify
failure.  Identical argv produces identical stdout bytes and files.
"""

from __future__ import annotations

import argparse
import json
import math
import mimetypes
import os
import re
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import catalog as cat
from . import expr as ex
from . import slicer as sl
from .export import write_csv, write_document, write_polylines
from .roots import solve_level
from .verify import run_verify

DEFAULT_WINDOW = (-2 * math.pi, 2 * math.pi, -3.0, 3.0)
GRID_MIN, GRID_MAX = 8, 4096


class UsageError(Exception):
    pass


class ComputationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let window values like -2:2:-7:7 pass as arguments, not flags
        self._negative_number_matcher = re.compile(r"^-\d+(\.\d*)?((:|x)\S*)?$")

    def error(self, message):  # argparse would SystemExit(2); we want exit 1
        raise UsageError(message)


def _parse_window(text: str) -> sl.Window:
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"window must be xmin:xmax:ymin:ymax, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"window components must be numbers, got {text!r}") from None
    try:
        return sl.Window(*vals)
    except sl.SliceError as exc:
        raise UsageError(str(exc)) from None


def _default_grid() -> int:
    env = os.environ.get("REALSLICE_GRID")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"REALSLICE_GRID must be an integer, got {env!r}") from None
        return n
    return 256


def _parse_grid(text: str | None, refine: int, im_tol: float, pole_cap: float) -> sl.GridSpec:
    if text is None:
        nx = ny = _default_grid()
    else:
        parts = text.lower().split("x")
        try:
            if len(parts) == 1:
                nx = ny = int(parts[0])
            elif len(parts) == 2:
                nx, ny = int(parts[0]), int(parts[1])
            else:
                raise ValueError
        except ValueError:
            raise UsageError(f"grid must be N or NXxNY, got {text!r}") from None
    for n in (nx, ny):
        if not (GRID_MIN <= n <= GRID_MAX):
            raise UsageError(f"grid must be within [{GRID_MIN}, {GRID_MAX}], got {n}")
    try:
        return sl.GridSpec(nx=nx, ny=ny, refine_iters=refine, im_tol=im_tol, pole_cap=pole_cap)
    except sl.SliceError as exc:
        raise UsageError(str(exc)) from None


def _parse_expr(text: str) -> ex.Expr:
    try:
        return ex.parse(text)
    except ex.ParseError as exc:
        raise UsageError(f"bad expression: {exc}") from None


def _compute_slice(expr_text: str, window: sl.Window, grid: sl.GridSpec, threads: int = 1):
    e = _parse_expr(expr_text)
    try:
        return e, sl.extract_slice(e, window, grid, threads=threads)
    except (sl.SliceError, ex.EvalError) as exc:
        raise ComputationError(str(exc)) from None


def _write_out(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _fmt(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def _add_common(p: _Parser, need_expr: bool = True) -> None:
    if need_expr:
        p.add_argument("--expr", required=True, help="expression in z, e.g. 'sin(z)+2'")
    p.add_argument("--window", default=None, help="xmin:xmax:ymin:ymax (default -2pi:2pi:-3:3)")
    p.add_argument("--grid", default=None, help="cells per axis: N or NXxNY (default 256)")
    p.add_argument("--refine", type=int, default=3, help="Newton refinement iterations")
    p.add_argument("--im-tol", type=float, default=1e-9, help="refinement target for |Im f|")
    p.add_argument("--pole-cap", type=float, default=1e6, help="|f| mask threshold")
    p.add_argument("--threads", type=int, default=1, help="grid sampling threads")


def _build_parser() -> _Parser:
    p = _Parser(prog="realslice", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("slice", help="extract real-slice curves")
    _add_common(ps)
    ps.add_argument("--format", choices=("json", "obj", "csv"), default="json")
    ps.add_argument("--out", default="-", help="output path ('-' = stdout)")

    pr = sub.add_parser("roots", help="solve f(z) = w on the slice")
    _add_common(pr)
    pr.add_argument("--target", type=float, required=True, help="real level w")
    pr.add_argument("--out", default=None, help="also write the curve-set document here")

    pc = sub.add_parser("catalog", help="closed-form branches for a cataloged function")
    pc.add_argument("--function", required=True, choices=cat.FUNCTION_IDS)
    pc.add_argument("--window", default=None)

    pv = sub.add_parser("verify", help="run the oracle-agreement suite")
    pv.add_argument("--grid", type=int, default=256)

    pe = sub.add_parser("serve", help="HTTP API and static viewer")
    pe.add_argument("--host", default="127.0.0.1")
    pe.add_argument("--port", type=int, default=8757)
    pe.add_argument("--static", default=None, help="directory with the viewer bundle")
    return p


def _cmd_slice(args) -> int:
    window = _parse_window(args.window) if args.window else sl.Window(*DEFAULT_WINDOW)
    grid = _parse_grid(args.grid, args.refine, args.im_tol, args.pole_cap)
    _, s = _compute_slice(args.expr, window, grid, args.threads)
    if args.format == "json":
        _write_out(args.out, write_document(s))
    elif args.format == "obj":
        _write_out(args.out, write_polylines(s).encode("utf-8"))
    else:
        texts = write_csv(s)
        if args.out == "-":
            for i, txt in enumerate(texts):
                sys.stdout.write(f"# branch {i}\n{txt}")
            sys.stdout.flush()
        else:
            stem, dot_ext = os.path.splitext(args.out)
            ext = dot_ext or ".csv"
            for i, txt in enumerate(texts):
                with open(f"{stem}.branch{i:03d}{ext}", "w", encoding="utf-8") as fh:
                    fh.write(txt)
    return 0


def _cmd_roots(args) -> int:
    window = _parse_window(args.window) if args.window else sl.Window(*DEFAULT_WINDOW)
    grid = _parse_grid(args.grid, args.refine, args.im_tol, args.pole_cap)
    e, s = _compute_slice(args.expr, window, grid, args.threads)
    rts = solve_level(e, args.target, s)
    print("re\tim\tresidual\ttangency\tverified\tpair")
    for r in rts:
        pair = "-" if r.conjugate_partner is None else str(r.conjugate_partner)
        print(
            f"{_fmt(r.z.real)}\t{_fmt(r.z.imag)}\t{r.residual:.3e}"
            f"\t{'yes' if r.tangency else 'no'}\t{'yes' if r.newton_verified else 'no'}\t{pair}"
        )
    if args.out:
        _write_out(args.out, write_document(s, rts))
    return 0


def _cmd_catalog(args) -> int:
    window = _parse_window(args.window) if args.window else sl.Window(*DEFAULT_WINDOW)
    try:
        specs = cat.enumerate_branches(args.function, window)
    except cat.CatalogError as exc:
        raise UsageError(str(exc)) from None
    for b in specs:
        anchor = "-" if b.anchor is None else _fmt(b.anchor)
        n = "-" if b.n is None else str(b.n)
        print(
            f"{b.kind}\tanchor={anchor}\tn={n}"
            f"\tt=[{_fmt(b.lo)}, {_fmt(b.hi)}]\tvalue={b.rule_text()}"
        )
    return 0


def _cmd_verify(args) -> int:
    if not (GRID_MIN <= args.grid <= GRID_MAX):
        raise UsageError(f"grid must be within [{GRID_MIN}, {GRID_MAX}]")
    results = run_verify(args.grid)
    failed = 0
    for name, ok, detail in results:
        status = "ok" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        print(f"verify: {name}: {status}{suffix}")
        failed += 0 if ok else 1
    print(f"verify: {len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 3


# ---------------------------------------------------------------------------
# serve


def _query_window(q: dict) -> sl.Window:
    raw = q.get("window", [None])[0]
    if raw is None:
        return sl.Window(*DEFAULT_WINDOW)
    return _parse_window(raw)


def _query_grid(q: dict) -> sl.GridSpec:
    raw = q.get("grid", [None])[0]
    refine = int(q.get("refine", ["3"])[0])
    return _parse_grid(raw, refine, 1e-9, 1e6)


def _api_slice(q: dict) -> bytes:
    exprs = q.get("expr", [])
    if not exprs:
        raise UsageError("missing expr parameter")
    _, s = _compute_slice(exprs[0], _query_window(q), _query_grid(q))
    return write_document(s)


def _api_roots(q: dict) -> bytes:
    exprs = q.get("expr", [])
    if not exprs:
        raise UsageError("missing expr parameter")
    targets = q.get("target", [])
    if not targets:
        raise UsageError("missing target parameter")
    try:
        w = float(targets[0])
    except ValueError:
        raise UsageError(f"target must be a number, got {targets[0]!r}") from None
    if not math.isfinite(w):
        raise UsageError("target must be finite")
    e, s = _compute_slice(exprs[0], _query_window(q), _query_grid(q))
    rts = solve_level(e, w, s)
    return write_document(s, rts)


def make_handler(static_dir: str | None):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # keep request logs on stderr
            sys.stderr.write("serve: %s\n" % (fmt % args))

        def _send(self, code: int, content_type: str, body: bytes) -> None:
            self.send_response(code)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _send_error_json(self, code: int, message: str) -> None:
            body = json.dumps({"error": message}).encode("utf-8")
            self._send(code, "application/json", body)

        def do_GET(self):  # noqa: N802 (http.server API)
            url = urlparse(self.path)
            q = parse_qs(url.query)
            try:
                if url.path == "/api/slice":
                    self._send(200, "application/json", _api_slice(q))
                elif url.path == "/api/roots":
                    self._send(200, "application/json", _api_roots(q))
                else:
                    self._serve_static(url.path)
            except (UsageError, ValueError) as exc:
                self._send_error_json(400, str(exc))
            except ComputationError as exc:
                self._send_error_json(422, str(exc))
            except BrokenPipeError:
                pass

        def _serve_static(self, path: str) -> None:
            if static_dir is None:
                if path == "/":
                    self._send(
                        200,
                        "text/plain; charset=utf-8",
                        b"realslice serve: use /api/slice and /api/roots "
                        b"(no viewer bundle configured)\n",
                    )
                else:
                    self._send_error_json(404, "not found")
                return
            rel = path.lstrip("/") or "index.html"
            base = os.path.realpath(static_dir)
            full = os.path.realpath(os.path.join(base, rel))
            if not full.startswith(base + os.sep) and full != base:
                self._send_error_json(404, "not found")
                return
            if os.path.isdir(full):
                full = os.path.join(full, "index.html")
            if not os.path.isfile(full):
                self._send_error_json(404, "not found")
                return
            ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
            with open(full, "rb") as fh:
                self._send(200, ctype, fh.read())

    return Handler


def _cmd_serve(args) -> int:
    static_dir = args.static
    if static_dir is None and os.path.isdir("frontend/dist"):
        static_dir = "frontend/dist"
    server = ThreadingHTTPServer((args.host, args.port), make_handler(static_dir))
    bundle = static_dir if static_dir else "none"
    sys.stderr.write(
        f"serve: listening on http://{args.host}:{server.server_address[1]} "
        f"(viewer bundle: {bundle})\n"
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# ---------------------------------------------------------------------------


def run(argv: list[str]) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "slice":
            return _cmd_slice(args)
        if args.command == "roots":
            return _cmd_roots(args)
        if args.command == "catalog":
            return _cmd_catalog(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_serve(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ComputationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
