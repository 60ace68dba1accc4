"""FastAPI app wrapping the core package.

One POST endpoint per CLI subcommand. Error mapping: text-format parse
failures and bad parameters give 422, violated mathematical hypotheses
give 409, numerical breakdown (non-convergence, overflow) gives 500; all
with a JSON body {"kind", "message", ...}.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..conjugation import (
    Homomorphism,
    check_system_conjugation,
    determinant_hom,
)
from ..controllability import associated_invariant_system, larc_rank, sample_reachable
from ..csvio import cloud_csv, state_header, trajectory_csv
from ..errors import InputError, NumericalError, ValidationError
from ..groups import algebra_coords, identity_element
from ..solvers import SolveOptions, simulate, solve_piecewise, solve_rk4
from ..sysdsl import SysParseFailure, parse_system
from ..systems import parse_signal, validate
from . import schemas as sc

_HYPOTHESIS = 409
_USAGE = 422
_NUMERICAL = 500


def _parse(text: str):
    return parse_system(text)


def _start_element(system, start):
    if start is None:
        return identity_element(system.group)
    arr = np.asarray(start, dtype=float)
    if not system.group.is_abelian and arr.ndim == 1:
        raise InputError("start must be a matrix (list of rows) on matrix groups")
    return arr


def _identity_hom(src_group, tgt_group) -> Homomorphism:
    if src_group.kind != tgt_group.kind or src_group.n != tgt_group.n:
        raise InputError("identity homomorphism needs source and target of the same group")
    # change of basis between the two specs' algebra bases (usually the identity)
    cols = [algebra_coords(tgt_group, b) for b in src_group.algebra_basis]
    return Homomorphism(src_group, tgt_group, lambda g: np.asarray(g, dtype=float).copy(),
                        np.column_stack(cols), name="identity")


def create_app() -> FastAPI:
    app = FastAPI(title="lieaffine", version=__version__)

    @app.exception_handler(SysParseFailure)
    async def _parse_failure(request, exc: SysParseFailure):
        errors = [sc.ParseErrorOut(kind=e.kind, message=e.message, line=e.span.line,
                                   col=e.span.col, length=e.span.length).model_dump()
                  for e in exc.errors]
        return JSONResponse(status_code=_USAGE,
                            content={"kind": "parse", "message": "system description is invalid",
                                     "errors": errors})

    @app.exception_handler(InputError)
    async def _input_error(request, exc: InputError):
        return JSONResponse(status_code=_USAGE, content={"kind": "usage", "message": str(exc)})

    @app.exception_handler(ValidationError)
    async def _validation_error(request, exc: ValidationError):
        return JSONResponse(status_code=_HYPOTHESIS,
                            content={"kind": "hypothesis", "message": str(exc)})

    @app.exception_handler(NumericalError)
    async def _numerical_error(request, exc: NumericalError):
        return JSONResponse(status_code=_NUMERICAL,
                            content={"kind": "numerical", "message": str(exc)})

    @app.get("/health", response_model=sc.HealthResponse)
    async def health():
        return sc.HealthResponse(status="ok", version=__version__)

    @app.post("/check", response_model=sc.CheckResponse)
    async def check(req: sc.CheckRequest):
        system = _parse(req.system)
        rep = validate(system)
        return sc.CheckResponse(commuting=rep.commuting, inner=rep.inner,
                                group=system.group.name, kind=system.group.kind,
                                n=system.group.n, dim=system.group.dim, m=system.m,
                                messages=list(rep.messages))

    @app.post("/simulate", response_model=sc.SimulateResponse)
    async def simulate_route(req: sc.SimulateRequest):
        system = _parse(req.system)
        signal = parse_signal(req.signal, m=system.m)
        start = _start_element(system, req.start)
        opts = SolveOptions(method=sc.METHOD_MAP[req.method],
                            rk4_dt=req.dt if req.dt is not None else 1e-3,
                            force=req.force)
        traj = simulate(system, start, signal, opts, req.samples_per_segment)
        return sc.SimulateResponse(
            method=traj.method, forced=traj.forced,
            header=["t"] + state_header(system.group),
            times=[float(t) for t in traj.times],
            states=[np.asarray(p).ravel().tolist() for p in traj.points],
            csv=trajectory_csv(system.group, traj),
        )

    @app.post("/compare", response_model=sc.CompareResponse)
    async def compare(req: sc.CompareRequest):
        system = _parse(req.system)
        signal = parse_signal(req.signal, m=system.m)
        rep = validate(system)
        start = identity_element(system.group)
        endpoints = {}
        opts = SolveOptions(method="product_formula", force=req.force)
        endpoints["product"] = solve_piecewise(system, start, signal, opts).endpoint
        if rep.inner and rep.commuting:
            opts = SolveOptions(method="closed_inner", force=req.force)
            endpoints["closed"] = solve_piecewise(system, start, signal, opts).endpoint
        endpoints["rk4"] = solve_rk4(system, start, signal).endpoint
        names = list(endpoints)
        distances = {}
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                d = float(np.linalg.norm((endpoints[a] - endpoints[b]).ravel()))
                distances[f"{a}_vs_{b}"] = d
        return sc.CompareResponse(methods=names, distances=distances,
                                  within=all(d <= req.tol for d in distances.values()),
                                  tol=req.tol)

    @app.post("/reach", response_model=sc.ReachResponse)
    async def reach(req: sc.ReachRequest):
        system = _parse(req.system)
        cloud = sample_reachable(system, identity_element(system.group),
                                 req.horizon, req.k_segments, req.n_samples, req.seed)
        return sc.ReachResponse(count=len(cloud.endpoints),
                                header=["index"] + state_header(system.group),
                                csv=cloud_csv(cloud))

    @app.post("/conjugate", response_model=sc.ConjugateResponse)
    async def conjugate(req: sc.ConjugateRequest):
        sys_src = _parse(req.system)
        sys_tgt = _parse(req.target)
        if req.hom == "det":
            hom = determinant_hom(sys_src.group, sys_tgt.group)
        else:
            hom = _identity_hom(sys_src.group, sys_tgt.group)
        signal = parse_signal(req.signal, m=sys_src.m)
        rep = check_system_conjugation(hom, sys_src, sys_tgt, [signal],
                                       points=req.points, tol=req.tol, seed=req.seed)
        conditions = {
            name: sc.ConditionOut(ok=c.passed, worst_error=c.worst_error,
                                  witnesses=[c.witness] if c.witness else [])
            for name, c in rep.conditions.items()
        }
        return sc.ConjugateResponse(ok=rep.passed, anomaly=rep.anomaly,
                                    worst_error=rep.worst_error, conditions=conditions)

    @app.post("/larc", response_model=sc.LarcResponse)
    async def larc(req: sc.LarcRequest):
        system = _parse(req.system)
        inv = associated_invariant_system(system)
        rank = larc_rank(inv, req.tol)
        return sc.LarcResponse(rank=rank, dim=system.group.dim,
                               full=rank == system.group.dim)

    return app
