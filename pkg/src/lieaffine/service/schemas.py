"""Request and response models for the HTTP service.

Systems travel as text in the .sys format; trajectories and clouds come
back both as structured arrays and as the exact CSV text the CLI writes
to disk (so determinism guarantees hold end to end).
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Method = Literal["auto", "product", "closed", "rk4"]

METHOD_MAP = {
    "auto": "auto",
    "product": "product_formula",
    "closed": "closed_inner",
    "rk4": "rk4",
}


class CheckRequest(BaseModel):
    system: str


class CheckResponse(BaseModel):
    commuting: bool
    inner: bool
    group: str
    kind: str
    n: int
    dim: int
    m: int
    messages: list[str]


class SimulateRequest(BaseModel):
    system: str
    signal: str
    start: Optional[list] = None  # matrix rows, or a flat vector on rn
    method: Method = "auto"
    samples_per_segment: int = Field(default=1, ge=1)
    dt: Optional[float] = Field(default=None, gt=0)
    force: bool = False


class SimulateResponse(BaseModel):
    method: str
    forced: bool
    header: list[str]
    times: list[float]
    states: list[list[float]]
    csv: str


class CompareRequest(BaseModel):
    system: str
    signal: str
    tol: float = Field(default=1e-6, gt=0)
    force: bool = False


class CompareResponse(BaseModel):
    methods: list[str]
    distances: dict[str, float]
    within: bool
    tol: float


class ReachRequest(BaseModel):
    system: str
    horizon: float = Field(gt=0)
    k_segments: int = Field(default=4, ge=1)
    n_samples: int = Field(default=100, ge=0)
    seed: int = Field(default=42, ge=0)


class ReachResponse(BaseModel):
    count: int
    header: list[str]
    csv: str


class ConjugateRequest(BaseModel):
    system: str
    target: str
    hom: Literal["det", "identity"] = "det"
    signal: str
    points: int = Field(default=3, ge=0)
    tol: float = Field(default=1e-6, gt=0)
    seed: int = Field(default=0, ge=0)


class ConditionOut(BaseModel):
    ok: bool = Field(serialization_alias="pass")
    worst_error: float
    witnesses: list[str]


class ConjugateResponse(BaseModel):
    ok: bool = Field(serialization_alias="pass")
    anomaly: bool
    worst_error: float
    conditions: dict[str, ConditionOut]


class LarcRequest(BaseModel):
    system: str
    tol: float = Field(default=1e-9, gt=0)


class LarcResponse(BaseModel):
    rank: int
    dim: int
    full: bool


class HealthResponse(BaseModel):
    status: str
    version: str


class ParseErrorOut(BaseModel):
    kind: str
    message: str
    line: int
    col: int
    length: int
