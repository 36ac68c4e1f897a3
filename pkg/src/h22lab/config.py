"""Run configuration: a JSON object with a fixed set of keys.

Every key is optional; omitted keys take the defaults below, which are
echoed into every report.  Unknown keys and ill-typed values are rejected
before any computation, with the file position when it can be located.

=====================  ==========================================  ==================
key                    meaning                                     default
=====================  ==========================================  ==================
graph                  graph file for mono-scan (see graph_io)     null
sizes                  complete unit graphs K_N used without       [1, 2]
                       a graph file
suites                 suite names to run                          command default
probes                 probe names for mono-scan                   full bank
edges                  edge labels for mono-scan, e.g. "1-d"       all edges
w_grid                 W values per edge                           [0.5 .. 2]
tolerance              monotonicity slack on dK/dW                 1e-8
method                 "score" or "finite_diff"                    "score"
backend                "quad" (N <= 3) or "mcmc" (N <= 6)          "quad"
quadrature             {"truncation": T, "nodes": k}               per-N default
chain                  {"steps", "burn_in", "scale", "chains",     ChainSpec()
                       "adapt"}
seed                   base seed (unsigned 64-bit)                 0
workers                threads for grid points                     1
out                    output directory                            "h22lab-out"
berezin_order          "xi_eta"; "eta_xi" flips the sign           "xi_eta"
                       convention (used by sensitivity fixtures)
partition_sizes        N values of the partition battery           [1, 2, 3]
partition_draws        random weight draws per N                   5
reroot_points          random rerooting points                     1000
schur_instances        random positive-definite H_beta             200
matrix_tree_instances  random tree-vs-determinant instances        200
twopoint_weights       W grid of the two-point law                 [0.25 .. 4]
perspective_samples    midpoint samples per probe                  100000
=====================  ==========================================  ==================
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from .errors import ConfigError
from .integrate import DEFAULT_W_GRID, ChainSpec, QuadratureSpec
from .suites import ALL_SUITES, SuiteConfig


@dataclass(frozen=True)
class RunConfig:
    graph: Optional[str] = None
    sizes: Tuple[int, ...] = (1, 2)
    suites: Optional[Tuple[str, ...]] = None
    probes: Optional[Tuple[str, ...]] = None
    edges: Optional[Tuple[str, ...]] = None
    w_grid: Tuple[float, ...] = DEFAULT_W_GRID
    tolerance: float = 1e-8
    method: str = "score"
    backend: str = "quad"
    quadrature: Optional[Tuple[float, int]] = None
    chain: Tuple[int, int, float, int, bool] = (20_000, 2_000, 0.8, 8, True)
    seed: int = 0
    workers: int = 1
    out: str = "h22lab-out"
    berezin_order: str = "xi_eta"
    partition_sizes: Tuple[int, ...] = (1, 2, 3)
    partition_draws: int = 5
    reroot_points: int = 1000
    schur_instances: int = 200
    matrix_tree_instances: int = 200
    twopoint_weights: Tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    perspective_samples: int = 100_000

    def quadrature_spec(self) -> Optional[QuadratureSpec]:
        if self.quadrature is None:
            return None
        return QuadratureSpec(*self.quadrature)

    def chain_spec(self) -> ChainSpec:
        steps, burn_in, scale, chains, adapt = self.chain
        return ChainSpec(self.seed, steps, burn_in, scale, chains, adapt)

    def suite_config(self, suites: Tuple[str, ...]) -> SuiteConfig:
        return SuiteConfig(
            suites=suites,
            seed=self.seed,
            berezin_order=self.berezin_order,
            matrix_tree_instances=self.matrix_tree_instances,
            partition_sizes=self.partition_sizes,
            partition_draws=self.partition_draws,
            reroot_points=self.reroot_points,
            schur_instances=self.schur_instances,
            twopoint_weights=self.twopoint_weights,
            perspective_samples=self.perspective_samples,
            monotonicity_grid=self.w_grid,
        )

    def canonical(self) -> Dict[str, Any]:
        """Every setting except the output directory, as plain JSON values."""
        out = {}
        for f in dataclasses.fields(self):
            if f.name == "out":
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        steps, burn_in, scale, chains, adapt = self.chain
        out["chain"] = {"steps": steps, "burn_in": burn_in, "scale": scale, "chains": chains, "adapt": adapt}
        if self.quadrature is not None:
            out["quadrature"] = {"truncation": self.quadrature[0], "nodes": self.quadrature[1]}
        return out

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "RunConfig":
        return validate({**self.canonical(), "out": self.out, **changes})


# --- validation ----------------------------------------------------------------------

def _fail(field_name: str, msg: str, where: str = "config") -> ConfigError:
    return ConfigError(f"{where}: field '{field_name}': {msg}")


def _int(name, v, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise _fail(name, f"expected an integer, got {v!r}")
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise _fail(name, f"{v} outside [{lo}, {hi}]")
    return v


def _float(name, v, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _fail(name, f"expected a number, got {v!r}")
    v = float(v)
    if v != v or v in (float("inf"), float("-inf")):
        raise _fail(name, "must be finite")
    if positive and not v > 0:
        raise _fail(name, f"must be > 0, got {v}")
    if nonneg and v < 0:
        raise _fail(name, f"must be >= 0, got {v}")
    return v


def _list(name, v, item, allow_empty=True):
    if not isinstance(v, list):
        raise _fail(name, f"expected a list, got {type(v).__name__}")
    if not v and not allow_empty:
        raise _fail(name, "must not be empty")
    return tuple(item(f"{name}[{k}]", x) for k, x in enumerate(v))


def _str(name, v):
    if not isinstance(v, str):
        raise _fail(name, f"expected a string, got {v!r}")
    return v


def _choice(options):
    def check(name, v):
        if v not in options:
            raise _fail(name, f"expected one of {list(options)}, got {v!r}")
        return v
    return check


def _optional(check):
    def inner(name, v):
        return None if v is None else check(name, v)
    return inner


def _quadrature(name, v):
    if not isinstance(v, dict) or set(v) - {"truncation", "nodes"}:
        raise _fail(name, "expected an object with keys 'truncation', 'nodes'")
    t = _float(f"{name}.truncation", v.get("truncation", 12.0), positive=True)
    k = _int(f"{name}.nodes", v.get("nodes", 120), lo=2, hi=1000)
    return (t, k)


def _chain(name, v):
    keys = ("steps", "burn_in", "scale", "chains", "adapt")
    if not isinstance(v, dict) or set(v) - set(keys):
        raise _fail(name, f"expected an object with keys among {list(keys)}")
    d = RunConfig.chain
    steps = _int(f"{name}.steps", v.get("steps", d[0]), lo=1)
    burn = _int(f"{name}.burn_in", v.get("burn_in", d[1]), lo=0)
    scale = _float(f"{name}.scale", v.get("scale", d[2]), positive=True)
    chains = _int(f"{name}.chains", v.get("chains", d[3]), lo=1)
    adapt = v.get("adapt", d[4])
    if not isinstance(adapt, bool):
        raise _fail(f"{name}.adapt", "expected true or false")
    if not steps > burn:
        raise _fail(name, f"need steps > burn_in, got {steps} <= {burn}")
    return (steps, burn, scale, chains, adapt)


def _suite_name(name, v):
    v = _str(name, v)
    if v not in ALL_SUITES:
        raise _fail(name, f"unknown suite {v!r}; available: {list(ALL_SUITES)}")
    return v


def _size(name, v):
    return _int(name, v, 1, 6)


def _pos(name, v):
    return _float(name, v, positive=True)


SCHEMA = {
    "graph": _optional(_str),
    "sizes": lambda n, v: _list(n, v, _size, allow_empty=False),
    "suites": _optional(lambda n, v: _list(n, v, _suite_name)),
    "probes": _optional(lambda n, v: _list(n, v, _str, allow_empty=False)),
    "edges": _optional(lambda n, v: _list(n, v, _str, allow_empty=False)),
    "w_grid": lambda n, v: _list(n, v, _pos, allow_empty=False),
    "tolerance": lambda n, v: _float(n, v, nonneg=True),
    "method": _choice(("score", "finite_diff")),
    "backend": _choice(("quad", "mcmc")),
    "quadrature": _optional(_quadrature),
    "chain": _chain,
    "seed": lambda n, v: _int(n, v, 0, 2 ** 64 - 1),
    "workers": lambda n, v: _int(n, v, 1, 256),
    "out": _str,
    "berezin_order": _choice(("xi_eta", "eta_xi")),
    "partition_sizes": lambda n, v: _list(n, v, lambda m, x: _int(m, x, 1, 3)),
    "partition_draws": lambda n, v: _int(n, v, 0),
    "reroot_points": lambda n, v: _int(n, v, 0),
    "schur_instances": lambda n, v: _int(n, v, 0),
    "matrix_tree_instances": lambda n, v: _int(n, v, 0),
    "twopoint_weights": lambda n, v: _list(n, v, _pos),
    "perspective_samples": lambda n, v: _int(n, v, 1),
}


def validate(data: Dict[str, Any], where: str = "config", text: Optional[str] = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: top level must be a JSON object")
    values = {}
    for key, raw in data.items():
        pos = _locate(text, key)
        if key not in SCHEMA:
            raise ConfigError(f"{where}{pos}: unknown key '{key}'; allowed: {sorted(SCHEMA)}")
        try:
            values[key] = SCHEMA[key](key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{where}{pos}: {str(exc).split(': ', 1)[1]}") from None
    return RunConfig(**values)


def _locate(text: Optional[str], key: str) -> str:
    if text is None:
        return ""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if m is None:
        return ""
    return f":{text.count(chr(10), 0, m.start()) + 1}"


def load_config(path: Union[str, Path, None]) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return validate(data, str(path), text)
