"""Reference block systems used by tests, scripts and the CLI configs."""
from __future__ import annotations

from .geometry import BlockSystem

# REF-0: c-axis data fixed, u/s placements chosen so every clause holds.
REF0 = {
    "A": [[0.06, 0.36], [0.0, 1.0], [0.0, 1.0]],
    "D": [[0.40, 0.70], [0.0, 1.0], [0.0, 1.0]],
    "B": [[0.75, 0.90], [0.0, 0.45], [0.0, 1.0]],
    "C": [[0.75, 0.90], [0.55, 1.0], [0.0, 1.0]],
    "Astar": [[0.04, 0.94], [0.0, 0.45], [0.10, 0.25]],
    "Dstar": [[0.04, 0.94], [0.55, 1.0], [0.10, 0.25]],
    "Bstar": [[0.05, 0.95], [0.0, 1.0], [0.40, 0.60]],
    "Cstar": [[0.05, 0.95], [0.0, 1.0], [0.70, 0.90]],
}

# The b1 = b2 = 1 variant: images of A, D and domains B, C pulled apart on c.
REF0_B1 = dict(REF0)
REF0_B1.update({
    "Astar": [[0.04, 0.94], [0.05, 0.5], [0.10, 0.25]],
    "Dstar": [[0.04, 0.94], [0.55, 1.0], [0.10, 0.25]],
    "B": [[0.75, 0.90], [0.05, 0.5], [0.0, 1.0]],
    "C": [[0.75, 0.90], [0.55, 1.0], [0.0, 1.0]],
})

# Figure 4 blocks taken literally; adjacent faces touch.
FIGURE4_CAPTION = {
    "A": [[0.0, 1 / 3], [0.0, 1.0], [0.0, 1.0]],
    "D": [[1 / 3, 2 / 3], [0.0, 1.0], [0.0, 1.0]],
    "B": [[2 / 3, 1.0], [0.0, 0.5], [0.0, 1.0]],
    "C": [[2 / 3, 1.0], [0.5, 1.0], [0.0, 1.0]],
    "Astar": [[0.0, 1.0], [0.0, 0.5], [0.0, 2 / 3]],
    "Dstar": [[0.0, 1.0], [0.5, 1.0], [0.0, 2 / 3]],
    "Bstar": [[0.0, 1.0], [0.0, 1.0], [2 / 3, 5 / 6]],
    "Cstar": [[0.0, 1.0], [0.0, 1.0], [5 / 6, 1.0]],
}

# Figure 4 right panel: orientation reversed on A along x_s only.
FIGURE4_RIGHT_SIGNS = {"A": [1, 1, -1], "B": [1, 1, 1], "C": [1, 1, 1], "D": [1, 1, 1]}


def ref0() -> BlockSystem:
    return BlockSystem.from_dict(REF0)


def ref0_b1() -> BlockSystem:
    return BlockSystem.from_dict(REF0_B1)


def figure4_caption() -> BlockSystem:
    return BlockSystem.from_dict(FIGURE4_CAPTION)
