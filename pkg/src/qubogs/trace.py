"""Per-iteration convergence records shared by the iterative solvers."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class IterationRecord:
    """State after one full iteration (k starts at 1)."""

    k: int
    x: np.ndarray
    residual: float
    relative_error: float | None = None
    block_energies: list[float] | None = None
    clipped_blocks: list[int] = field(default_factory=list)
    halfwidth_max: float | None = None


@dataclass
class IterationTrace:
    records: list[IterationRecord]
    converged: bool
    residual_is_absolute: bool = False

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final_x(self) -> np.ndarray:
        return self.records[-1].x

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.records])

    @property
    def errors(self) -> np.ndarray:
        """Relative errors as an array; NaN where no exact solution was supplied."""
        return np.array([np.nan if r.relative_error is None else r.relative_error for r in self.records])
