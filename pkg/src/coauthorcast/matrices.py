"""Empirical group means feeding the regressions.

``eta[i, j]``: mean publications in interval ``j`` among training researchers
with exactly ``i`` publications in ``[T0, t_{j-1}]`` (``i = 1..K``).

``xi[m, j]``: mean new coauthors in interval ``j`` among training researchers
with exactly ``m`` publications in that same interval (``m = 1..M``).

Both are ``rows x L`` grids (1-based labels, 0-based storage). Empty groups
hold NaN and are skipped by the fits.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from coauthorcast.corpus import DatasetSlice, WindowSpec
from coauthorcast.errors import TrainingError


@dataclass(frozen=True, eq=False)
class GroupMeans:
    """Group means with their group sizes.

    ``values[r - 1, j - 1]`` is the mean for group ``r`` in interval ``j``;
    NaN where ``counts`` is zero.
    """

    kind: str  # "eta" or "xi"
    values: np.ndarray
    counts: np.ndarray

    @property
    def row_label(self) -> str:
        return "i" if self.kind == "eta" else "m"

    @property
    def shape(self):
        return self.values.shape

    @property
    def defined(self) -> np.ndarray:
        return self.counts > 0

    def get(self, row: int, col: int) -> float:
        """Mean for 1-based group ``row`` and interval ``col``."""
        return float(self.values[row - 1, col - 1])

    def to_csv(self, counts: bool = False) -> str:
        grid = self.counts if counts else self.values
        out = io.StringIO()
        n_rows, n_cols = grid.shape
        out.write(f"{self.row_label}/j," + ",".join(str(j) for j in range(1, n_cols + 1)) + "\n")
        for r in range(n_rows):
            cells = []
            for c in range(n_cols):
                v = grid[r, c]
                if counts:
                    cells.append(str(int(v)))
                else:
                    cells.append("" if np.isnan(v) else repr(float(v)))
            out.write(f"{r + 1}," + ",".join(cells) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, kind: str, values_text: str, counts_text: str) -> "GroupMeans":
        values = _read_grid(values_text, float)
        counts = _read_grid(counts_text, int)
        return cls(kind, values, counts.astype(np.int64))


EtaMatrix = GroupMeans
XiMatrix = GroupMeans


def _read_grid(text: str, cast) -> np.ndarray:
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    body = [ln.split(",")[1:] for ln in rows[1:]]
    return np.array([[cast(c) if c != "" else np.nan for c in row] for row in body],
                    dtype=float)


def _group(keys: np.ndarray, vals: np.ndarray, n_groups: int):
    ok = (keys >= 1) & (keys <= n_groups)
    sums = np.bincount(keys[ok], weights=vals[ok], minlength=n_groups + 1)[1:]
    counts = np.bincount(keys[ok], minlength=n_groups + 1)[1:]
    return sums, counts


def _finish(kind, sums, counts):
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    if not np.any(counts > 0):
        raise TrainingError(f"every {kind} group is empty; check the training window")
    return GroupMeans(kind, values, counts.astype(np.int64))


def compute_eta(training: DatasetSlice, spec: WindowSpec) -> GroupMeans:
    """Mean publications per interval grouped by historical publication count."""
    if len(training) == 0:
        raise TrainingError("empty training slice")
    panel = training.panel
    t = spec.cutpoints
    sums = np.zeros((spec.K, spec.L))
    counts = np.zeros((spec.K, spec.L), dtype=np.int64)
    for j in range(1, spec.L + 1):
        hist = panel.h(t[j - 1])
        cur = panel.pubs_in(t[j - 1], t[j])
        sums[:, j - 1], counts[:, j - 1] = _group(hist, cur, spec.K)
    return _finish("eta", sums, counts)


def compute_xi(training: DatasetSlice, spec: WindowSpec) -> GroupMeans:
    """Mean new coauthors per interval grouped by that interval's publication count."""
    if len(training) == 0:
        raise TrainingError("empty training slice")
    panel = training.panel
    t = spec.cutpoints
    sums = np.zeros((spec.M, spec.L))
    counts = np.zeros((spec.M, spec.L), dtype=np.int64)
    for j in range(1, spec.L + 1):
        m = panel.pubs_in(t[j - 1], t[j])
        new = panel.new_in(t[j - 1], t[j])
        sums[:, j - 1], counts[:, j - 1] = _group(m, new, spec.M)
    return _finish("xi", sums, counts)
