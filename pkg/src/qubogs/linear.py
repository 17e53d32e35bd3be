"""Row-wise sparse linear systems at desk scale."""

from dataclasses import dataclass, field

import numpy as np

# One matrix row as (column, value) pairs, kept sorted by column.
Row = list[tuple[int, float]]


@dataclass
class LinearSystem:
    """A square system A x = b with A stored as per-row (column, value) lists.

    Systems here stay small (a few hundred unknowns), so the sparse storage
    exists to keep matrix-vector products proportional to the number of
    nonzeros, not to save memory.
    """

    n: int
    rows: list[Row] = field(repr=False)
    b: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.n < 1:
            raise ValueError("system size must be at least 1")
        if len(self.rows) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(self.rows)}")
        if self.b.shape != (self.n,):
            raise ValueError(f"right-hand side must have length {self.n}")
        for i, row in enumerate(self.rows):
            for j, _ in row:
                if not 0 <= j < self.n:
                    raise ValueError(f"row {i} references column {j} outside 0..{self.n - 1}")

    @classmethod
    def from_dense(cls, a, b) -> "LinearSystem":
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("coefficient matrix must be square")
        rows: list[Row] = []
        for i in range(a.shape[0]):
            rows.append([(j, float(a[i, j])) for j in range(a.shape[1]) if a[i, j] != 0.0])
        return cls(a.shape[0], rows, b)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, row in enumerate(self.rows):
            for j, v in row:
                a[i, j] += v
        return a

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"vector must have length {self.n}")
        out = np.zeros(self.n)
        for i, row in enumerate(self.rows):
            s = 0.0
            for j, v in row:
                s += v * x[j]
            out[i] = s
        return out

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        for i, row in enumerate(self.rows):
            for j, v in row:
                if j == i:
                    d[i] += v
        return d

    def max_nonzeros_per_row(self) -> int:
        return max(len(row) for row in self.rows)
