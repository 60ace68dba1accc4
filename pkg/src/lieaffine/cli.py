"""Command-line front end.

A thin client over the HTTP service: each subcommand posts to the
matching endpoint. By default the app is driven in-process through an
ASGI transport (no server needed); --server switches to a remote
instance. Exit codes: 0 success, 1 failed check or violated hypothesis,
2 usage or parse error, 3 numerical failure (including unreachable
server).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

__all__ = ["run", "main"]

_app = None


def _in_process_app():
    global _app
    if _app is None:
        from .service.app import create_app
        _app = create_app()
    return _app


def _post(server: str | None, path: str, payload: dict) -> tuple:
    if server:
        resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=300.0)
        return resp.status_code, resp.json()

    async def go():
        transport = httpx.ASGITransport(app=_in_process_app())
        async with httpx.AsyncClient(transport=transport, base_url="http://lieaffine") as client:
            return await client.post(path, json=payload, timeout=300.0)

    resp = asyncio.run(go())
    return resp.status_code, resp.json()


def _dump(body: dict) -> str:
    return json.dumps(body, sort_keys=True)


def _fail(status: int, body: dict) -> int:
    print(_dump(body), file=sys.stderr)
    if status == 409:
        return 1
    if status == 422:
        return 2
    return 3


def _read_system(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    return p.read_text()


def _write_text(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lieaffine",
                                     description="Affine control systems on matrix Lie groups.")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: run in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse a .sys file and report hypothesis checks")
    p.add_argument("file")

    p = sub.add_parser("simulate", help="solve along a piecewise-constant signal, write CSV")
    p.add_argument("file")
    p.add_argument("--signal", required=True, help='segments "dur:u1,u2;dur:u1,u2"')
    p.add_argument("--method", default="auto", choices=["auto", "product", "closed", "rk4"])
    p.add_argument("--samples-per-segment", type=int, default=1)
    p.add_argument("--dt", type=float, default=None, help="rk4 step size")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--force", action="store_true",
                   help="solve even if the commutation hypothesis fails")

    p = sub.add_parser("compare", help="endpoint distances between solver routes")
    p.add_argument("file")
    p.add_argument("--signal", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("reach", help="sample the reachable set, write a CSV cloud")
    p.add_argument("file")
    p.add_argument("--T", type=float, required=True, help="time horizon")
    p.add_argument("--segments", type=int, default=4)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")

    p = sub.add_parser("conjugate", help="check that a homomorphism carries one system to another")
    p.add_argument("file_g")
    p.add_argument("file_h")
    p.add_argument("--hom", default="det", choices=["det", "identity"])
    p.add_argument("--signal", required=True)
    p.add_argument("--points", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("larc", help="rank of the bracket-generated algebra")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-9)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "check":
            payload = {"system": _read_system(args.file)}
            status, body = _post(args.server, "/check", payload)
            if status != 200:
                return _fail(status, body)
            print(_dump(body))
            return 0 if body["commuting"] else 1

        if args.command == "simulate":
            payload = {
                "system": _read_system(args.file),
                "signal": args.signal,
                "method": args.method,
                "samples_per_segment": args.samples_per_segment,
                "force": args.force,
            }
            if args.dt is not None:
                payload["dt"] = args.dt
            status, body = _post(args.server, "/simulate", payload)
            if status != 200:
                return _fail(status, body)
            _write_text(args.out, body["csv"])
            return 0

        if args.command == "compare":
            payload = {"system": _read_system(args.file), "signal": args.signal,
                       "tol": args.tol, "force": args.force}
            status, body = _post(args.server, "/compare", payload)
            if status != 200:
                return _fail(status, body)
            print(_dump(body))
            return 0 if body["within"] else 1

        if args.command == "reach":
            payload = {"system": _read_system(args.file), "horizon": args.T,
                       "k_segments": args.segments, "n_samples": args.samples,
                       "seed": args.seed}
            status, body = _post(args.server, "/reach", payload)
            if status != 200:
                return _fail(status, body)
            _write_text(args.out, body["csv"])
            return 0

        if args.command == "conjugate":
            payload = {"system": _read_system(args.file_g),
                       "target": _read_system(args.file_h),
                       "hom": args.hom, "signal": args.signal,
                       "points": args.points, "tol": args.tol, "seed": args.seed}
            status, body = _post(args.server, "/conjugate", payload)
            if status != 200:
                return _fail(status, body)
            print(_dump(body))
            return 0 if body["pass"] else 1

        if args.command == "larc":
            payload = {"system": _read_system(args.file), "tol": args.tol}
            status, body = _post(args.server, "/larc", payload)
            if status != 200:
                return _fail(status, body)
            print(_dump(body))
            return 0

    except FileNotFoundError as exc:
        print(json.dumps({"kind": "usage", "message": str(exc)}), file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(json.dumps({"kind": "transport", "message": str(exc)}), file=sys.stderr)
        return 3

    return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
