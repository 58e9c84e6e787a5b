"""Regenerate island_patrol.asc: uniform patrol over the middle of the island's
main body (1.2 <= x <= 2.8), nothing at either end or on the peninsula."""

import os

import numpy as np

from parkguard.grid import Grid, ScalarField
from parkguard.terrain import write_esri_ascii

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    grid = Grid.from_extent(-0.2, 5.2, -0.2, 1.2, 0.02)
    X, _ = grid.mesh()
    shape = ((X >= 1.2) & (X <= 2.8)).astype(np.float64)
    with open(os.path.join(HERE, "island_patrol.asc"), "w") as fh:
        fh.write(write_esri_ascii(ScalarField(grid, shape)))


if __name__ == "__main__":
    main()
