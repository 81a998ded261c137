"""Double-next-neighbour digraphs and the invariant plane carrying each edge."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .errors import InvalidArgumentError

Edge = tuple[int, int]


def plane_for_target(target: int) -> int:
    """Plane index carrying every incoming connection of ``target``.

    Targets 1 and 2 own planes 1 and 2. From 3 on, targets are dealt
    round-robin over planes 3, 4, 5, so nodes 3, 6, 9, ... share plane 3.
    """
    if target < 1:
        raise InvalidArgumentError(f"node indices are 1-based, got {target}")
    if target <= 2:
        return target
    return (target - 3) % 3 + 3


def _wrap(k: int, n: int) -> int:
    return (k - 1) % n + 1


@dataclass(frozen=True)
class DNNGraph:
    """Nodes ``1..n`` with edges ``k -> k+1`` and ``k -> k+2`` (mod n)."""

    n: int
    edges: tuple[Edge, ...]
    plane_of_edge: Mapping[Edge, int] = field(repr=False)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))

    @property
    def planes(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.plane_of_edge.values())))

    def incoming(self, node: int) -> list[Edge]:
        return [e for e in self.edges if e[1] == node]

    def outgoing(self, node: int) -> list[Edge]:
        return [e for e in self.edges if e[0] == node]

    def edges_in_plane(self, plane: int) -> list[Edge]:
        return [e for e in self.edges if self.plane_of_edge[e] == plane]

    def targets_in_plane(self, plane: int) -> list[int]:
        return sorted({t for (_, t) in self.edges_in_plane(plane)})

    def sources_in_plane(self, plane: int) -> list[int]:
        return sorted({s for (s, _) in self.edges_in_plane(plane)})

    def outgoing_planes(self, node: int) -> set[int]:
        return {self.plane_of_edge[e] for e in self.outgoing(node)}

    def two_cycles(self) -> list[tuple[int, int]]:
        """Unordered node pairs joined by edges in both directions."""
        edge_set = set(self.edges)
        return sorted(
            (i, k) for (i, k) in edge_set if i < k and (k, i) in edge_set
        )

    def is_strongly_connected(self) -> bool:
        def reach(adj: dict[int, list[int]]) -> set[int]:
            seen = {1}
            stack = [1]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            return seen

        fwd: dict[int, list[int]] = {v: [] for v in self.nodes}
        bwd: dict[int, list[int]] = {v: [] for v in self.nodes}
        for s, t in self.edges:
            fwd[s].append(t)
            bwd[t].append(s)
        everything = set(self.nodes)
        return reach(fwd) == everything and reach(bwd) == everything

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [[s, t] for s, t in self.edges],
            "planes": {f"{s}->{t}": j for (s, t), j in self.plane_of_edge.items()},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "DNNGraph":
        edges = tuple((int(s), int(t)) for s, t in data["edges"])
        planes = {}
        for key, j in data["planes"].items():
            s, t = key.split("->")
            planes[(int(s), int(t))] = int(j)
        return cls(n=int(data["n"]), edges=edges, plane_of_edge=planes)

    @classmethod
    def from_json(cls, text: str) -> "DNNGraph":
        return cls.from_dict(json.loads(text))


def build_graph(n: int) -> DNNGraph:
    """Build the DNN graph on ``n >= 3`` nodes with its plane assignment."""
    if int(n) != n or n < 3:
        raise InvalidArgumentError(f"a DNN graph needs n >= 3 nodes, got {n}")
    n = int(n)
    edges = [(k, _wrap(k + 1, n)) for k in range(1, n + 1)]
    edges += [(k, _wrap(k + 2, n)) for k in range(1, n + 1)]
    planes = {e: plane_for_target(e[1]) for e in edges}
    return DNNGraph(n=n, edges=tuple(edges), plane_of_edge=planes)


def expected_edge_count(n: int) -> int:
    if n < 3:
        raise InvalidArgumentError(f"a DNN graph needs n >= 3 nodes, got {n}")
    return 2 * n
