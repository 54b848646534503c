"""Discrete matching result: clusters of vertices from both graphs.

A Matching is the binary outcome of a solve: a partition of the vertices
of both graphs into shared clusters, each holding at most k_max vertices
per side. The text serialization is one ``cluster <id> | G: <i,...> |
H: <j,...>`` line per cluster followed by an ``objective <F>`` line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Matching", "serialize_matching", "parse_matching", "read_matching", "write_matching"]


@dataclass(frozen=True)
class Matching:
    """Clusters of (G-vertex tuple, H-vertex tuple) plus the objective they induce.

    Construct through :meth:`from_parts`, which sorts vertices, drops
    clusters that are empty on both sides, and orders clusters
    canonically so equal matchings compare equal.
    """

    clusters: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    objective: float

    @classmethod
    def from_parts(cls, clusters, objective: float) -> "Matching":
        cleaned = []
        for gs, hs in clusters:
            gs = tuple(sorted(int(v) for v in gs))
            hs = tuple(sorted(int(v) for v in hs))
            if gs or hs:
                cleaned.append((gs, hs))
        cleaned.sort()
        return cls(clusters=tuple(cleaned), objective=float(objective))

    def validate(self, n_g: int, n_h: int, k_max: int) -> None:
        """Check the partition and capacity invariants; raise ValueError if broken."""
        seen_g: set[int] = set()
        seen_h: set[int] = set()
        for gs, hs in self.clusters:
            if not gs and not hs:
                raise ValueError("cluster empty on both sides")
            if len(gs) > k_max or len(hs) > k_max:
                raise ValueError(f"cluster ({gs}, {hs}) exceeds k_max={k_max}")
            for v in gs:
                if not 0 <= v < n_g or v in seen_g:
                    raise ValueError(f"G vertex {v} missing, repeated, or out of range")
                seen_g.add(v)
            for v in hs:
                if not 0 <= v < n_h or v in seen_h:
                    raise ValueError(f"H vertex {v} missing, repeated, or out of range")
                seen_h.add(v)
        if len(seen_g) != n_g:
            raise ValueError(f"expected every one of {n_g} G vertices exactly once, got {len(seen_g)}")
        if len(seen_h) != n_h:
            raise ValueError(f"expected every one of {n_h} H vertices exactly once, got {len(seen_h)}")

    def to_matrices(self, n_g: int, n_h: int) -> tuple[np.ndarray, np.ndarray]:
        """Binary assignment pair with one row per cluster."""
        rows = max(len(self.clusters), 1)
        p1 = np.zeros((rows, n_g))
        p2 = np.zeros((rows, n_h))
        for r, (gs, hs) in enumerate(self.clusters):
            for v in gs:
                p1[r, v] = 1.0
            for v in hs:
                p2[r, v] = 1.0
        return p1, p2

    def cluster_of_g(self, n_g: int) -> np.ndarray:
        """Map each G vertex to its cluster index."""
        out = np.full(n_g, -1, dtype=int)
        for r, (gs, _) in enumerate(self.clusters):
            out[list(gs)] = r
        return out

    def cluster_of_h(self, n_h: int) -> np.ndarray:
        out = np.full(n_h, -1, dtype=int)
        for r, (_, hs) in enumerate(self.clusters):
            out[list(hs)] = r
        return out


def serialize_matching(matching: Matching) -> str:
    lines = []
    for r, (gs, hs) in enumerate(matching.clusters):
        g_str = ",".join(str(v) for v in gs)
        h_str = ",".join(str(v) for v in hs)
        lines.append(f"cluster {r} | G: {g_str} | H: {h_str}")
    lines.append(f"objective {matching.objective!r}")
    return "\n".join(lines) + "\n"


def _parse_vertex_list(text: str, lineno: int) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise ValueError(f"line {lineno}: bad vertex list {text!r}") from None


def parse_matching(text: str) -> Matching:
    """Inverse of :func:`serialize_matching`."""
    clusters = []
    objective = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("cluster "):
            parts = line.split("|")
            if len(parts) != 3 or not parts[1].strip().startswith("G:") or not parts[2].strip().startswith("H:"):
                raise ValueError(f"line {lineno}: malformed cluster line {line!r}")
            gs = _parse_vertex_list(parts[1].strip()[2:], lineno)
            hs = _parse_vertex_list(parts[2].strip()[2:], lineno)
            clusters.append((gs, hs))
        elif line.startswith("objective "):
            if objective is not None:
                raise ValueError(f"line {lineno}: duplicate objective line")
            try:
                objective = float(line.split(maxsplit=1)[1])
            except ValueError:
                raise ValueError(f"line {lineno}: bad objective value") from None
        else:
            raise ValueError(f"line {lineno}: unknown line {line!r}")
    if objective is None:
        raise ValueError("missing objective line")
    return Matching.from_parts(clusters, objective)


def read_matching(path) -> Matching:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_matching(text)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def write_matching(matching: Matching, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_matching(matching))
