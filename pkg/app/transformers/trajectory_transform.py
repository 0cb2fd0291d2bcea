from __future__ import annotations

from typing import Iterator

import numpy as np

from backend.dynamics import Trajectory


class TrajectoryTransform:
    """
    Trajectory -> CSV header + rows

    Columns:
      t, r_1 .. r_{n*n-1}, purity, trace_err, min_eig[, z]

    Every value is printed in scientific notation with 17 significant digits,
    which round-trips an IEEE double exactly.
    """
    def __init__(self):
        self.fmt = "%.16e"

    def header(self, trajectory: Trajectory) -> list[str]:
        d = trajectory.n * trajectory.n - 1
        columns = ["t"] + [f"r_{a}" for a in range(1, d + 1)] + ["purity", "trace_err", "min_eig"]
        if trajectory.contact_z is not None:
            columns.append("z")
        return columns

    def rows(self, trajectory: Trajectory) -> Iterator[list[str]]:
        for row in self.table(trajectory):
            yield [self.fmt % float(value) for value in row]

    def apply(self, trajectory: Trajectory) -> tuple[list[str], list[list[str]]]:
        return self.header(trajectory), list(self.rows(trajectory))

    def table(self, trajectory: Trajectory) -> np.ndarray:
        blocks = [
            trajectory.times[:, None],
            trajectory.bloch(),
            trajectory.purity[:, None],
            trajectory.trace_error[:, None],
            trajectory.min_eigenvalue[:, None],
        ]
        if trajectory.contact_z is not None:
            blocks.append(trajectory.contact_z[:, None])
        return np.hstack(blocks).astype(np.float64)
