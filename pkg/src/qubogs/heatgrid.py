"""Finite-difference assembly for the steady heat equation on a square plate.

The plate [0, L] x [0, L] is divided into ``m`` segments per side, giving grid
nodes (x_i, y_j) = (i*L/m, j*L/m) for i, j = 0..m. Edge nodes carry prescribed
temperatures; the (m-1)^2 interior nodes are unknowns. The five-point Laplacian
stencil couples each interior node to its four neighbors:

    4*T[i,j] - T[i+1,j] - T[i-1,j] - T[i,j+1] - T[i,j-1] = (boundary + sources)

Neighbor terms that fall on an edge move to the right-hand side, so the
assembled system A x = b reproduces the discrete solution exactly.
"""

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .linear import LinearSystem, Row

EDGES = ("bottom", "top", "left", "right")

# Edge profile: temperature as a function of the coordinate along the edge
# (x for bottom/top, y for left/right).
EdgeProfile = Callable[[float], float]


def boundary_temperature(edge: str, s: float, length: float) -> float:
    """Default edge temperatures: cold bottom/left, linear 0..100 C ramp on top/right.

    ``s`` is the coordinate along the edge (x on bottom/top, y on left/right).
    """
    if edge not in EDGES:
        raise ValueError(f"unknown edge {edge!r}, expected one of {EDGES}")
    if not 0.0 <= s <= length:
        raise ValueError(f"position {s} outside edge range [0, {length}]")
    if edge in ("bottom", "left"):
        return 0.0
    return 100.0 * s / length


def named_boundary(name: str, length: float) -> dict[str, EdgeProfile]:
    """Boundary profile sets selectable by name in configs: the default ramp or all-zero."""
    if name == "ramp":
        return {edge: (lambda s, e=edge: boundary_temperature(e, s, length)) for edge in EDGES}
    if name == "zero":
        return {edge: (lambda s: 0.0) for edge in EDGES}
    raise ValueError(f"unknown boundary profile {name!r}, expected 'ramp' or 'zero'")


@dataclass
class HeatProblem:
    """Square-plate steady heat problem: grid resolution, edge temperatures, point sources.

    ``sources`` lists (i, j, strength) right-hand-side contributions at interior
    nodes, positive strength meaning a heat source. ``boundary`` maps each edge
    name to a profile function; ``None`` selects the default ramp profile.
    """

    m: int
    length: float = 1.0
    boundary: Mapping[str, EdgeProfile] | None = None
    sources: list[tuple[int, int, float]] = field(default_factory=list)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("m (segments per side) must be an integer >= 2")
        self.m = int(self.m)
        if self.length <= 0:
            raise ValueError("plate side length must be positive")
        if self.boundary is not None:
            missing = [e for e in EDGES if e not in self.boundary]
            if missing:
                raise ValueError(f"boundary profiles missing for edges {missing}")
        for i, j, _ in self.sources:
            if not (1 <= i <= self.m - 1 and 1 <= j <= self.m - 1):
                raise ValueError(f"source at ({i}, {j}) is not an interior node of an m={self.m} grid")

    @property
    def n(self) -> int:
        return (self.m - 1) ** 2

    def node(self, k: int) -> float:
        return self.length * k / self.m

    def edge_value(self, edge: str, s: float) -> float:
        if self.boundary is None:
            return boundary_temperature(edge, s, self.length)
        return float(self.boundary[edge](s))

    def row_of(self, i: int, j: int) -> int:
        """Row-major interior index: i runs fastest."""
        return (j - 1) * (self.m - 1) + (i - 1)


def assemble_system(problem: HeatProblem) -> LinearSystem:
    """Assemble the five-point-stencil system for the interior nodes.

    Interior node (i, j) becomes row (j-1)*(m-1) + (i-1) with +4 on the
    diagonal and -1 for each interior neighbor; edge-neighbor temperatures and
    source strengths accumulate into b.
    """
    m = problem.m
    nside = m - 1
    n = nside * nside
    rows: list[Row] = []
    b = np.zeros(n)
    for j in range(1, m):
        for i in range(1, m):
            k = problem.row_of(i, j)
            row: Row = []
            # neighbors in ascending column order: below, left, center, right, above
            if j - 1 >= 1:
                row.append((k - nside, -1.0))
            else:
                b[k] += problem.edge_value("bottom", problem.node(i))
            if i - 1 >= 1:
                row.append((k - 1, -1.0))
            else:
                b[k] += problem.edge_value("left", problem.node(j))
            row.append((k, 4.0))
            if i + 1 <= m - 1:
                row.append((k + 1, -1.0))
            else:
                b[k] += problem.edge_value("right", problem.node(j))
            if j + 1 <= m - 1:
                row.append((k + nside, -1.0))
            else:
                b[k] += problem.edge_value("top", problem.node(i))
            rows.append(row)
    for i, j, strength in problem.sources:
        b[problem.row_of(i, j)] += strength
    return LinearSystem(n, rows, b)


def grid_to_field(x, problem: HeatProblem) -> np.ndarray:
    """Expand an interior solution vector to the full (m+1) x (m+1) node grid.

    Entry [i, j] holds the temperature at (x_i, y_j). Corner nodes take the
    bottom/top profile values (the default profiles agree at corners anyway).
    """
    x = np.asarray(x, dtype=float)
    m = problem.m
    if x.shape != (problem.n,):
        raise ValueError(f"solution vector must have length {problem.n}, got {x.shape}")
    field_ = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        field_[i, 0] = problem.edge_value("bottom", problem.node(i))
        field_[i, m] = problem.edge_value("top", problem.node(i))
    for j in range(1, m):
        field_[0, j] = problem.edge_value("left", problem.node(j))
        field_[m, j] = problem.edge_value("right", problem.node(j))
    for j in range(1, m):
        for i in range(1, m):
            field_[i, j] = x[problem.row_of(i, j)]
    return field_
