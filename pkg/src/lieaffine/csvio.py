"""CSV rendering for trajectories and reach clouds.

Floats are written with repr (shortest round-trip form), which is
deterministic for IEEE-754 doubles; reproducibility tests compare these
outputs byte for byte. Matrix states flatten row-major into columns
e11..enn; vector states use x1..xn.
"""

from __future__ import annotations

import numpy as np

from .controllability import ReachSample
from .groups import GroupSpec
from .systems import Trajectory

__all__ = ["state_header", "trajectory_csv", "cloud_csv"]


def state_header(spec: GroupSpec) -> list:
    if spec.is_abelian:
        return [f"x{i + 1}" for i in range(spec.n)]
    return [f"e{i + 1}{j + 1}" for i in range(spec.n) for j in range(spec.n)]


def _row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def trajectory_csv(spec: GroupSpec, traj: Trajectory) -> str:
    lines = ["t," + ",".join(state_header(spec))]
    for t, p in zip(traj.times, traj.points):
        lines.append(_row([t]) + "," + _row(np.asarray(p).ravel()))
    return "\n".join(lines) + "\n"


def cloud_csv(cloud: ReachSample) -> str:
    spec = cloud.system.group
    lines = ["index," + ",".join(state_header(spec))]
    for idx, p in enumerate(cloud.endpoints):
        lines.append(f"{idx}," + _row(np.asarray(p).ravel()))
    return "\n".join(lines) + "\n"
