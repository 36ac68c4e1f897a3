"""Plain-text graph files.

Format (``#`` starts a comment, blank lines are ignored)::

    n 3              # number of bulk vertices, required, first statement
    default 0.5      # optional weight for every pair not listed below
    1 2 0.75         # edge between bulk vertices 1 and 2
    1 d 1.0          # edge to the root; "d" and "delta" both name it

Bulk vertices are numbered ``1..n``.  Pairs may be listed once only; self
loops, negative or non-finite weights and a disconnected support are errors.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from .errors import ConfigError, StructureError
from .graph import RootedGraph

ROOT_NAMES = ("d", "delta")


def _vertex(token: str, n: int, where: str) -> int:
    if token.lower() in ROOT_NAMES:
        return n
    try:
        v = int(token)
    except ValueError:
        raise ConfigError(f"{where}: bad vertex {token!r}") from None
    if not 1 <= v <= n:
        raise ConfigError(f"{where}: vertex {v} outside 1..{n}")
    return v - 1


def _weight(token: str, where: str) -> float:
    try:
        w = float(token)
    except ValueError:
        raise ConfigError(f"{where}: bad weight {token!r}") from None
    if not math.isfinite(w) or w < 0:
        raise ConfigError(f"{where}: weight must be finite and >= 0, got {token}")
    return w


def parse_graph(text: str, source: str = "<graph>") -> RootedGraph:
    n = None
    default = 0.0
    entries: Dict[Tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        parts = line.split()
        if parts[0] == "n":
            if n is not None:
                raise ConfigError(f"{where}: 'n' given twice")
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
                raise ConfigError(f"{where}: expected 'n <positive integer>'")
            n = int(parts[1])
            continue
        if n is None:
            raise ConfigError(f"{where}: 'n' must come before any other statement")
        if parts[0] == "default":
            if len(parts) != 2:
                raise ConfigError(f"{where}: expected 'default <weight>'")
            default = _weight(parts[1], where)
            continue
        if len(parts) != 3:
            raise ConfigError(f"{where}: expected '<i> <j> <weight>'")
        a, b = _vertex(parts[0], n, where), _vertex(parts[1], n, where)
        if a == b:
            raise ConfigError(f"{where}: self loop at vertex {parts[0]}")
        key = (min(a, b), max(a, b))
        if key in entries:
            raise ConfigError(f"{where}: pair {parts[0]}-{parts[1]} listed twice")
        entries[key] = _weight(parts[2], where)
    if n is None:
        raise ConfigError(f"{source}: missing 'n' statement")
    w = np.full((n + 1, n + 1), default)
    for (a, b), v in entries.items():
        w[a, b] = w[b, a] = v
    try:
        return RootedGraph(w)
    except StructureError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_graph(path: Union[str, Path]) -> RootedGraph:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read graph file {path}: {exc.strerror}") from None
    return parse_graph(text, str(path))


def format_graph(g: RootedGraph) -> str:
    """Inverse of :func:`parse_graph` (upper triangle, positive weights only)."""
    lines: List[str] = [f"n {g.n}"]
    for a, b in g.edges():
        lines.append(f"{g.label(a)} {g.label(b)} {float(g.weights[a, b])!r}")
    return "\n".join(lines) + "\n"
