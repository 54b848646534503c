"""Graph data type and deterministic text-format I/O.

The on-disk format is line oriented: a ``graph <n> <directed|undirected>``
header, optional ``label <i> <string>`` and ``coord <i> <x> <y>`` lines, and
``edge <i> <j> <weight>`` lines with 0-indexed endpoints. Lines starting with
``#`` are ignored. Weights are written with ``repr`` so a write/read cycle
reproduces the adjacency matrix bitwise.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Graph",
    "GraphFormatError",
    "parse_graph",
    "format_graph",
    "read_graph",
    "write_graph",
    "permute",
]


class GraphFormatError(ValueError):
    """Raised when graph text does not conform to the file format."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        if source is not None:
            message = f"{source}: {message}"
        super().__init__(message)
        self.line = line
        self.source = source


class Graph:
    """Weighted graph stored as a dense adjacency matrix.

    Parameters
    ----------
    adj : array-like of shape (n, n)
        Edge weights; 0.0 marks absence. Entries must be finite. For an
        undirected graph the matrix must equal its transpose exactly.
    directed : bool, optional
        Whether edges are directed. Default False.
    labels : sequence of str, optional
        Per-vertex labels. When given, one non-empty string per vertex,
        without leading/trailing whitespace or newlines.
    coords : array-like of shape (n, 2), optional
        Per-vertex planar coordinates.

    Notes
    -----
    Instances are immutable: the adjacency and coordinate arrays are
    copied on construction and marked read-only, so a Graph may be shared
    freely across threads.
    """

    def __init__(self, adj, directed: bool = False, labels=None, coords=None):
        adj = np.array(adj, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if not np.all(np.isfinite(adj)):
            raise ValueError("adjacency entries must be finite")
        if not directed and not np.array_equal(adj, adj.T):
            raise ValueError("undirected graph requires an exactly symmetric adjacency")
        n = adj.shape[0]

        if labels is not None:
            labels = tuple(labels)
            if len(labels) != n:
                raise ValueError(f"expected {n} labels, got {len(labels)}")
            for i, lab in enumerate(labels):
                if not isinstance(lab, str) or not lab or lab != lab.strip() or "\n" in lab:
                    raise ValueError(f"label {i} must be a non-empty stripped single-line string")

        if coords is not None:
            coords = np.array(coords, dtype=float)
            if coords.shape != (n, 2):
                raise ValueError(f"coords must have shape ({n}, 2), got {coords.shape}")
            if not np.all(np.isfinite(coords)):
                raise ValueError("coords must be finite")
            coords.setflags(write=False)

        adj.setflags(write=False)
        self._adj = adj
        self._directed = bool(directed)
        self._labels = labels
        self._coords = coords

    @property
    def n(self) -> int:
        """Number of vertices."""
        return self._adj.shape[0]

    @property
    def adj(self) -> np.ndarray:
        """Read-only n-by-n adjacency matrix."""
        return self._adj

    @property
    def directed(self) -> bool:
        return self._directed

    @property
    def labels(self):
        return self._labels

    @property
    def coords(self):
        return self._coords

    def num_edges(self) -> int:
        """Count edges: ordered pairs if directed, unordered (plus loops) if not."""
        nz = self._adj != 0.0
        if self._directed:
            return int(nz.sum())
        return int(np.triu(nz).sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._directed == other._directed
            and np.array_equal(self._adj, other._adj)
            and self._labels == other._labels
            and (
                (self._coords is None and other._coords is None)
                or (
                    self._coords is not None
                    and other._coords is not None
                    and np.array_equal(self._coords, other._coords)
                )
            )
        )

    __hash__ = None

    def __repr__(self) -> str:
        kind = "directed" if self._directed else "undirected"
        return f"Graph(n={self.n}, {kind}, edges={self.num_edges()})"


def permute(graph: Graph, perm) -> Graph:
    """Relabel vertices: vertex ``i`` of the input becomes ``perm[i]``.

    Parameters
    ----------
    graph : Graph
    perm : sequence of int
        A bijection on ``range(graph.n)``.

    Returns
    -------
    Graph
        New graph with ``adj'[perm[i], perm[j]] = adj[i, j]`` and labels
        and coordinates carried along.
    """
    perm = np.asarray(perm, dtype=int)
    n = graph.n
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValueError(f"perm must be a bijection on range({n})")
    new_adj = np.empty_like(graph.adj)
    new_adj[np.ix_(perm, perm)] = graph.adj
    inv = np.argsort(perm)
    labels = None if graph.labels is None else tuple(graph.labels[inv[t]] for t in range(n))
    coords = None if graph.coords is None else graph.coords[inv]
    return Graph(new_adj, directed=graph.directed, labels=labels, coords=coords)


def _parse_index(token: str, n: int, lineno: int, source, what: str) -> int:
    try:
        i = int(token)
    except ValueError:
        raise GraphFormatError(f"{what} index {token!r} is not an integer", lineno, source) from None
    if not 0 <= i < n:
        raise GraphFormatError(f"{what} index {i} out of range for n={n}", lineno, source)
    return i


def _parse_float(token: str, lineno: int, source, what: str) -> float:
    try:
        x = float(token)
    except ValueError:
        raise GraphFormatError(f"{what} {token!r} is not a number", lineno, source) from None
    if not math.isfinite(x):
        raise GraphFormatError(f"{what} {token!r} is not finite", lineno, source)
    return x


def parse_graph(text: str, source: str | None = None) -> Graph:
    """Parse graph text; raise :class:`GraphFormatError` with a line number on failure."""
    n = None
    directed = False
    adj = None
    labels: dict[int, str] = {}
    coords: dict[int, tuple[float, float]] = {}
    seen_edges: dict[tuple[int, int], float] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        directive = line.split(maxsplit=1)[0]

        if directive == "graph":
            if n is not None:
                raise GraphFormatError("duplicate graph header", lineno, source)
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(f"malformed header {line!r}", lineno, source)
            try:
                n = int(parts[1])
            except ValueError:
                raise GraphFormatError(f"vertex count {parts[1]!r} is not an integer", lineno, source) from None
            if n < 0:
                raise GraphFormatError(f"vertex count must be non-negative, got {n}", lineno, source)
            if parts[2] not in ("directed", "undirected"):
                raise GraphFormatError(f"mode must be 'directed' or 'undirected', got {parts[2]!r}", lineno, source)
            directed = parts[2] == "directed"
            adj = np.zeros((n, n))
            continue

        if n is None:
            raise GraphFormatError(f"{directive!r} before graph header", lineno, source)

        if directive == "label":
            parts = line.split(maxsplit=2)
            if len(parts) != 3:
                raise GraphFormatError(f"malformed label line {line!r}", lineno, source)
            i = _parse_index(parts[1], n, lineno, source, "label")
            if i in labels:
                raise GraphFormatError(f"duplicate label for vertex {i}", lineno, source)
            labels[i] = parts[2]
        elif directive == "coord":
            parts = line.split()
            if len(parts) != 4:
                raise GraphFormatError(f"malformed coord line {line!r}", lineno, source)
            i = _parse_index(parts[1], n, lineno, source, "coord")
            if i in coords:
                raise GraphFormatError(f"duplicate coord for vertex {i}", lineno, source)
            coords[i] = (
                _parse_float(parts[2], lineno, source, "coordinate"),
                _parse_float(parts[3], lineno, source, "coordinate"),
            )
        elif directive == "edge":
            parts = line.split()
            if len(parts) != 4:
                raise GraphFormatError(f"malformed edge line {line!r}", lineno, source)
            i = _parse_index(parts[1], n, lineno, source, "edge")
            j = _parse_index(parts[2], n, lineno, source, "edge")
            w = _parse_float(parts[3], lineno, source, "edge weight")
            if (i, j) in seen_edges:
                raise GraphFormatError(f"duplicate edge ({i}, {j})", lineno, source)
            if not directed and (j, i) in seen_edges and seen_edges[(j, i)] != w:
                raise GraphFormatError(
                    f"edge ({i}, {j}) weight {w!r} conflicts with edge ({j}, {i}) "
                    f"weight {seen_edges[(j, i)]!r} in an undirected graph",
                    lineno,
                    source,
                )
            seen_edges[(i, j)] = w
            adj[i, j] = w
            if not directed:
                adj[j, i] = w
        else:
            raise GraphFormatError(f"unknown directive {directive!r}", lineno, source)

    if n is None:
        raise GraphFormatError("missing graph header", None, source)

    label_list = None
    if labels:
        missing = [i for i in range(n) if i not in labels]
        if missing:
            raise GraphFormatError(f"vertices {missing} lack labels while others are labeled", None, source)
        label_list = [labels[i] for i in range(n)]
    coord_arr = None
    if coords:
        missing = [i for i in range(n) if i not in coords]
        if missing:
            raise GraphFormatError(f"vertices {missing} lack coords while others have them", None, source)
        coord_arr = np.array([coords[i] for i in range(n)])

    try:
        return Graph(adj, directed=directed, labels=label_list, coords=coord_arr)
    except ValueError as exc:
        raise GraphFormatError(str(exc), None, source) from exc


def format_graph(graph: Graph) -> str:
    """Serialize a graph to the text format (inverse of :func:`parse_graph`)."""
    lines = [f"graph {graph.n} {'directed' if graph.directed else 'undirected'}"]
    if graph.labels is not None:
        lines.extend(f"label {i} {lab}" for i, lab in enumerate(graph.labels))
    if graph.coords is not None:
        lines.extend(f"coord {i} {float(x)!r} {float(y)!r}" for i, (x, y) in enumerate(graph.coords))
    adj = graph.adj
    if graph.directed:
        pairs = zip(*np.nonzero(adj))
    else:
        pairs = zip(*np.nonzero(np.triu(adj)))
    lines.extend(f"edge {i} {j} {float(adj[i, j])!r}" for i, j in pairs)
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    """Read a graph file; parse errors carry the path and line number."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_graph(text, source=str(path))


def write_graph(graph: Graph, path) -> None:
    """Write a graph file that :func:`read_graph` restores bitwise."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(graph))
