"""Point-set instances: text format and the built-in corpus."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllCoincident, NonNumeric, RaggedRow, TooFewPoints


@dataclass(frozen=True)
class Instance:
    name: str
    points: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


def parse_instance(text: str, name: str = "instance") -> Instance:
    """One point per line, whitespace-separated; '#' lines and blanks are skipped."""
    rows: list[list[float]] = []
    dim = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise NonNumeric(f"line {lineno}: non-numeric field in {line!r}") from None
        if not all(np.isfinite(row)):
            raise NonNumeric(f"line {lineno}: non-finite coordinate")
        if dim is None:
            dim = len(row)
        elif len(row) != dim:
            raise RaggedRow(f"line {lineno}: expected {dim} coordinates, got {len(row)}")
        rows.append(row)
    if len(rows) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(rows)}")
    pts = np.array(rows, dtype=np.float64)
    if np.all(pts == pts[0]):
        raise AllCoincident("all points coincide")
    return Instance(name, pts)


def format_instance(inst: Instance) -> str:
    """Inverse of ``parse_instance``; repr() round-trips every float exactly."""
    lines = [f"# {inst.name}: N={inst.size} d={inst.dimension}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in inst.points]
    return "\n".join(lines) + "\n"


_PHI = 1.6180339887

_CORPUS = {
    "paper-01": [(1, 0, 0), (-1, -0.5, 0), (-0.25, 0.5, 0), (-0.5, 0, 1), (-0.5, 0, -1)],
    "paper-02": [(1, 1, 1, -0.4472), (1, -1, -1, -0.4472), (-1, 1, -1, -0.4472),
                 (-1, -1, 1, -0.4472), (0, 0, 0, 1.7889)],
    "paper-03": [(-1, -1, -1), (1, -1, 1), (-0.5, 0, 1), (-0.25, 0, 0.5), (0, 0, 0),
                 (0.25, 0, -0.5), (0.5, 0, -1)],
    "paper-04": [(1, 0, 0, 0), (-1, 0, 0, 0), (0, 1, 0, 0), (0, -1, 0, 0), (0, 0, 1, 0),
                 (0, 0, -1, 0), (0, 0, 0, 1), (0, 0, 0, -1)],
    "paper-05": [(0, 0, 0), (-1, -1, -1), (1, -1, -1), (1, -1, 1), (-1, -1, 1),
                 (-1, 1, -1), (1, 1, -1), (1, 1, 1), (-1, 1, 1)],
    "paper-06": [(1, 0, 0, 0), (1, 0, 0, 1), (1, 0, -1, 0), (0, -1, 1, 1), (-1, -1, -1, -1),
                 (0, 0, 0, 0), (-1, 1, -1, 1), (0, 1, 0, 1), (0, 0, 0, 1), (0, 1, 1, 0)],
    "paper-07": [(0, 0, 0, 0), (-1, 0, -3, 1.6), (-1, -3, -1, 1.2), (-1, -2, 2, 0.8),
                 (-1, 2, 2, 0.4), (-1, 3, 2, 0), (1, 0, -3, 0), (1, -3, -1, 0.4),
                 (1, -2, 2, 0.8), (1, 2, 2, 1.2), (1, 3, 2, 1.6)],
    "paper-08": [(-1, -1, -1), (-0.5, -1, -1), (0, -1, -1), (0.5, -1, -1), (1, -1, -1),
                 (-1, 1, 1), (-0.5, 1, 1), (0, 1, 1), (0.5, 1, 1), (1, 1, 1), (1, 0, 0),
                 (-1, 0, 0)],
    "paper-09": [(-1, 0, 1), (-1, -1, -1), (1, 1, -1), (0, -2, 2), (0, 2, 2), (0, -2, -2),
                 (0, 2, -2), (1, 0, -3), (1, -3, -1), (1, -2, 2), (1, 2, 2), (1, 3, -1)],
    "paper-10": [(1, 0, _PHI), (0, _PHI, 1), (_PHI, 1, 0), (-1, 0, _PHI), (0, _PHI, -1),
                 (_PHI, -1, 0), (1, 0, -_PHI), (0, -_PHI, 1), (-_PHI, 1, 0), (-1, 0, -_PHI),
                 (0, -_PHI, -1), (-_PHI, -1, 0)],
    "appendix-a": [(0.61, -0.45), (-0.83, -0.73), (-0.85, -0.99), (-0.44, 0.17), (0.18, 0.43),
                   (-0.74, -0.93), (0.09, 0.59), (0.51, -0.87), (-0.31, 0.70), (0.69, 0.41)],
}
_CORPUS["appendix-a-swapped"] = ([_CORPUS["appendix-a"][-1]] + _CORPUS["appendix-a"][1:-1]
                                 + [_CORPUS["appendix-a"][0]])

# topologies explored per scheme (original, enhanced) as published
PUBLISHED_COUNTS = {
    "paper-01": (14, 14), "paper-02": (14, 14), "paper-03": (546, 522),
    "paper-04": (11441, 11434), "paper-05": (146598, 145840),
    "paper-06": (1089974, 929935), "paper-07": (109088, 71859), "paper-08": (99498, 78943),
    "paper-09": (1161774, 954201), "paper-10": (111203146, 93314215),
}


def builtin_instances() -> list[Instance]:
    return [Instance(name, np.array(pts, dtype=np.float64)) for name, pts in _CORPUS.items()]


def builtin(name: str) -> Instance:
    if name not in _CORPUS:
        raise KeyError(f"unknown built-in instance {name!r}; try one of {sorted(_CORPUS)}")
    return Instance(name, np.array(_CORPUS[name], dtype=np.float64))
