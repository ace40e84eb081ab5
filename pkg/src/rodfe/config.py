"""TOML run configuration for the command-line interface.

Schema:

    case = "helix"                # benchmark id providing geometry/loads
    [case_params]                 # optional per-case overrides
    rho = 1e2
    [discretization]
    p = 1
    n_el = 16
    formulation = "MX"            # "DB" | "MX"
    integration = "full"          # "full" | "reduced"
    [solver]
    tol = 1e-8
    n_increments = 1              # or: auto_increments = true
    max_iter = 30
    [stiffness]                   # optional law override (exclusive with
    ke = 1.0                      # [compliance])
    ...
"""

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .benchmarks import CASES
from .material import ElasticLaw
from .mesh import Discretization

_LAW_KEYS = ("ke", "ksy", "ksz", "kt", "kby", "kbz")


@dataclass
class RunConfig:
    case_id: str
    case_params: dict
    discretization: Discretization
    tolerance: float | None
    n_increments: int | None
    auto_increments: bool
    max_iterations: int
    law: ElasticLaw | None


def _build_law(data):
    if "stiffness" in data and "compliance" in data:
        raise ValueError("stiffness and compliance blocks are mutually exclusive")
    for block, builder in (
        ("stiffness", ElasticLaw.from_stiffness),
        ("compliance", ElasticLaw.from_compliance),
    ):
        if block in data:
            entries = data[block]
            missing = [k for k in _LAW_KEYS if k not in entries]
            if missing:
                raise ValueError(f"{block} block missing entries: {missing}")
            return builder(**{k: float(entries[k]) for k in _LAW_KEYS})
    return None


def load_config(path):
    with open(path, "rb") as fh:
        data = tomllib.load(fh)

    case_id = data.get("case")
    if case_id not in CASES:
        raise ValueError(f"config must set case to one of {sorted(CASES)}")

    dd = data.get("discretization", {})
    disc = Discretization(
        p=int(dd.get("p", 1)),
        n_el=int(dd.get("n_el", 16)),
        formulation=str(dd.get("formulation", "MX")),
        integration=str(dd.get("integration", "full")),
    )

    sd = data.get("solver", {})
    n_increments = sd.get("n_increments")
    return RunConfig(
        case_id=case_id,
        case_params=dict(data.get("case_params", {})),
        discretization=disc,
        tolerance=float(sd["tol"]) if "tol" in sd else None,
        n_increments=int(n_increments) if n_increments is not None else None,
        auto_increments=bool(sd.get("auto_increments", False)),
        max_iterations=int(sd.get("max_iter", 30)),
        law=_build_law(data),
    )
