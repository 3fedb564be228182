"""Command-line client for the solver service.

The CLI only marshals inputs into a solve request, posts it (in-process by
default, or to a remote `--server` URL), and writes the output files; all
solver logic lives behind the service boundary.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 means numerical failure here,
    # so route usage problems to the validation exit code instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _CliError(message, EXIT_VALIDATION)


def _parse_bar(spec: str) -> dict:
    """Parse 'WxH,L,RES' (e.g. 4x4,100,medium)."""
    try:
        dims, length, resolution = spec.split(",")
        width, height = dims.lower().split("x")
        payload = {
            "width": float(width),
            "height": float(height),
            "length": float(length),
            "resolution": resolution.strip(),
        }
    except ValueError:
        raise _CliError(
            f"bad --bar spec {spec!r}; expected WxH,L,RES like 4x4,100,medium",
            EXIT_VALIDATION,
        ) from None
    if payload["resolution"] not in ("coarse", "medium", "high"):
        raise _CliError(
            f"bad --bar resolution {payload['resolution']!r}", EXIT_VALIDATION
        )
    return payload


def _parse_axis_value(text: str, flag: str) -> tuple[str, float]:
    try:
        axis, value = text.split("=")
        axis = axis.strip().lower()
        if axis not in ("x", "y", "z"):
            raise ValueError
        return axis, float(value)
    except ValueError:
        raise _CliError(
            f"bad {flag} spec {text!r}; expected AXIS=VALUE like z=0", EXIT_VALIDATION
        ) from None


def _parse_fix(text: str) -> dict:
    axis, value = _parse_axis_value(text, "--fix")
    return {
        "axis": axis,
        "value": value,
        "kind": "displacement",
        "vector": (0.0, 0.0, 0.0),
    }


def _parse_load(text: str) -> dict:
    try:
        plane, vector = text.split(":")
    except ValueError:
        raise _CliError(
            f"bad --load spec {text!r}; expected AXIS=VALUE:TX,TY,TZ", EXIT_VALIDATION
        ) from None
    axis, value = _parse_axis_value(plane, "--load")
    try:
        tx, ty, tz = (float(p) for p in vector.split(","))
    except ValueError:
        raise _CliError(
            f"bad --load traction {vector!r}; expected TX,TY,TZ", EXIT_VALIDATION
        ) from None
    return {"axis": axis, "value": value, "kind": "traction", "vector": (tx, ty, tz)}


def _parse_point(text: str) -> tuple[float, float, float]:
    try:
        x, y, z = (float(p) for p in text.split(","))
        return (x, y, z)
    except ValueError:
        raise _CliError(
            f"bad --interior point {text!r}; expected X,Y,Z", EXIT_VALIDATION
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tribem",
        description="Solve a 3D elastostatic boundary-element problem",
    )
    mesh = parser.add_mutually_exclusive_group(required=True)
    mesh.add_argument("--mesh", metavar="PATH", help="ASCII STL surface mesh")
    mesh.add_argument(
        "--bar",
        metavar="WxH,L,RES",
        help="built-in bar mesh, e.g. 4x4,100,medium (RES: coarse|medium|high)",
    )
    parser.add_argument("--bc", metavar="PATH", help="BC file: '<idx> <D|T> <vx> <vy> <vz>'")
    parser.add_argument(
        "--fix",
        action="append",
        default=[],
        metavar="AXIS=VALUE",
        help="zero displacement on elements with all vertices on the plane (repeatable)",
    )
    parser.add_argument(
        "--load",
        action="append",
        default=[],
        metavar="AXIS=VALUE:TX,TY,TZ",
        help="prescribed traction on elements with all vertices on the plane (repeatable)",
    )
    parser.add_argument("--E", type=float, required=True, help="elastic modulus")
    parser.add_argument("--nu", type=float, required=True, help="Poisson ratio")
    parser.add_argument("--out", required=True, metavar="PATH", help="results CSV path")
    parser.add_argument(
        "--unknowns",
        metavar="PATH",
        help="flat unknowns file (default: OUT with .unknowns.txt suffix)",
    )
    parser.add_argument(
        "--report",
        metavar="PATH",
        help="run report file (default: OUT with .report.txt suffix)",
    )
    parser.add_argument(
        "--interior",
        action="append",
        default=[],
        metavar="X,Y,Z",
        help="interior point to evaluate displacement at (repeatable)",
    )
    parser.add_argument("--workers", type=int, default=1, help="assembly worker threads")
    parser.add_argument(
        "--no-diagnostic",
        action="store_true",
        help="skip the rigid-body consistency diagnostic",
    )
    parser.add_argument(
        "--server",
        metavar="URL",
        help="POST to a running tribem-server instead of solving in-process",
    )
    return parser


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="ascii", errors="strict")
    except FileNotFoundError:
        raise _CliError(f"{what} not found: {path}", EXIT_IO) from None
    except UnicodeDecodeError:
        raise _CliError(
            f"{what} {path} is not ASCII text (binary STL is not supported)",
            EXIT_VALIDATION,
        ) from None
    except OSError as exc:
        raise _CliError(f"cannot read {what} {path}: {exc}", EXIT_IO) from None


def _build_request(args) -> dict:
    if args.mesh is not None:
        mesh: dict = {"stl_text": _read_text(args.mesh, "mesh file")}
    else:
        mesh = {"bar": _parse_bar(args.bar)}
    boundary: dict = {
        "rules": [_parse_fix(f) for f in args.fix] + [_parse_load(l) for l in args.load],
    }
    if args.bc is not None:
        boundary["file_text"] = _read_text(args.bc, "BC file")
    return {
        "mesh": mesh,
        "material": {"E": args.E, "nu": args.nu},
        "boundary": boundary,
        "interior_points": [_parse_point(p) for p in args.interior],
        "workers": args.workers,
        "diagnostic": not args.no_diagnostic,
    }


def _post_remote(server: str, payload: dict) -> httpx.Response:
    try:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post("/solve", json=payload)
    except httpx.HTTPError as exc:
        raise _CliError(f"cannot reach server {server}: {exc}", EXIT_IO) from None


def _post_local(payload: dict) -> httpx.Response:
    from .service.app import create_app

    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://tribem.local", timeout=None
        ) as client:
            return await client.post("/solve", json=payload)

    return asyncio.run(go())


def _check_response(response: httpx.Response) -> dict:
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = response.text
    if isinstance(detail, dict):
        kind = detail.get("kind", "validation")
        message = detail.get("message", str(detail))
    else:
        kind = "validation" if response.status_code in (400, 422) else "numerical"
        message = str(detail)
    code = EXIT_NUMERICAL if kind == "numerical" else EXIT_VALIDATION
    raise _CliError(f"solve failed ({kind}): {message}", code)


def _write_outputs(args, result: dict) -> None:
    from .pipeline import format_report, format_results_csv, format_unknowns

    out = Path(args.out)
    unknowns = Path(args.unknowns) if args.unknowns else out.with_suffix(".unknowns.txt")
    report_path = Path(args.report) if args.report else out.with_suffix(".report.txt")

    report = dict(result["report"])
    report["interior"] = result.get("interior", [])
    texts = [
        (out, format_results_csv(result["elements"])),
        (unknowns, format_unknowns(result["unknowns"])),
        (report_path, format_report(report)),
    ]
    for path, text in texts:
        try:
            path.write_text(text)
        except OSError as exc:
            raise _CliError(f"cannot write {path}: {exc}", EXIT_IO) from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        payload = _build_request(args)
        response = (
            _post_remote(args.server, payload) if args.server else _post_local(payload)
        )
        result = _check_response(response)
        _write_outputs(args, result)
    except _CliError as exc:
        print(f"tribem: {exc}", file=sys.stderr)
        return exc.code
    report = result["report"]
    print(
        f"ok: {report['element_count']} elements, "
        f"relative residual {report['residual_norm']:.3e}, "
        f"results in {args.out}"
    )
    return EXIT_OK


def entry() -> None:
    sys.exit(main())
