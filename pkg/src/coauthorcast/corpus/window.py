"""Time cutpoints, size caps, and the training/validation/test slices they define."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from coauthorcast.corpus.timeline import AuthorTimeline, Panel
from coauthorcast.errors import ConfigError

ROLES = ("training", "validation", "test")


@dataclass(frozen=True)
class WindowSpec:
    """Cutpoints ``t_0 < ... < t_J`` and the caps governing dataset slicing.

    Interval ``j`` (1-based) is ``(t_{j-1}, t_j]``. ``U, V, X, Y, Z`` are
    cutpoint indices, not years.

    Attributes
    ----------
    T0 : int
        First year of the corpus window.
    cutpoints : tuple of int
        ``t_0 .. t_J``; ``t_0`` is ``T1`` and ``t_J`` is ``T2``.
    I, K : int
        Historical-publication rows of the fitted and the empirical
        publication-rate matrices.
    L : int
        Number of training intervals.
    M : int
        Cap on annual publications (rows of the coauthor-rate matrix).
    I1 : int
        Cap on historical publications of test researchers.
    U, V : int
        Validation interval indices.
    X, Y, Z : int
        Test anchor, evaluation start, and horizon indices.
    """

    T0: int
    cutpoints: tuple[int, ...]
    I: int
    K: int
    L: int
    M: int
    I1: int
    U: int
    V: int
    X: int
    Y: int
    Z: int

    def __post_init__(self):
        object.__setattr__(self, "cutpoints", tuple(int(t) for t in self.cutpoints))
        t = self.cutpoints
        if len(t) < 2:
            raise ConfigError("need at least two cutpoints")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ConfigError(f"cutpoints must be strictly increasing: {t}")
        if self.T0 > t[0]:
            raise ConfigError(f"T0={self.T0} is after T1={t[0]}")
        for name in ("I", "K", "L", "M", "I1"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.K > self.I:
            raise ConfigError(f"K={self.K} exceeds I={self.I}")
        if self.L > self.J:
            raise ConfigError(f"L={self.L} exceeds J={self.J}")
        if not 1 <= self.U < self.V <= self.J:
            raise ConfigError(f"need 1 <= U < V <= J, got U={self.U}, V={self.V}, J={self.J}")
        if not 0 <= self.X < self.Y < self.Z <= self.J:
            raise ConfigError(
                f"need 0 <= X < Y < Z <= J, got X={self.X}, Y={self.Y}, Z={self.Z}, J={self.J}")

    @classmethod
    def from_years(cls, *, T0, T1, T2, I, K, L, M, I1, t_U, t_V, t_X, t_Y, t_Z, step=1):
        """Equally spaced cutpoints (one year apart by default), with the
        validation/test anchors given as calendar years."""
        if step < 1 or (T2 - T1) % step:
            raise ConfigError(f"T2 - T1 = {T2 - T1} is not a multiple of step {step}")
        cuts = tuple(range(T1, T2 + 1, step))

        def index(year, name):
            try:
                return cuts.index(year)
            except ValueError:
                raise ConfigError(f"{name}={year} is not a cutpoint") from None

        return cls(T0=T0, cutpoints=cuts, I=I, K=K, L=L, M=M, I1=I1,
                   U=index(t_U, "t_U"), V=index(t_V, "t_V"), X=index(t_X, "t_X"),
                   Y=index(t_Y, "t_Y"), Z=index(t_Z, "t_Z"))

    @classmethod
    def set4(cls) -> "WindowSpec":
        return cls.from_years(T0=1951, T1=1985, T2=2018, I=180, K=42, L=24, M=12, I1=40,
                              t_U=2000, t_V=2009, t_X=2000, t_Y=2010, t_Z=2018)

    @classmethod
    def set3(cls) -> "WindowSpec":
        return cls.from_years(T0=1951, T1=1985, T2=2018, I=180, K=42, L=24, M=12, I1=60,
                              t_U=2000, t_V=2009, t_X=1994, t_Y=2010, t_Z=2018)

    @property
    def T1(self) -> int:
        return self.cutpoints[0]

    @property
    def T2(self) -> int:
        return self.cutpoints[-1]

    @property
    def J(self) -> int:
        return len(self.cutpoints) - 1

    def t(self, j: int) -> int:
        return self.cutpoints[j]

    def offsets(self) -> np.ndarray:
        """``t_j - t_1`` for ``j = 1..J``: the centred time regressor."""
        t = np.asarray(self.cutpoints, dtype=float)
        return t[1:] - t[1]

    def to_dict(self) -> dict:
        return {
            "T0": self.T0, "cutpoints": list(self.cutpoints), "I": self.I, "K": self.K,
            "L": self.L, "M": self.M, "I1": self.I1, "U": self.U, "V": self.V,
            "X": self.X, "Y": self.Y, "Z": self.Z,
        }


@dataclass(frozen=True)
class DatasetSlice:
    """Researchers eligible for one role, with the window that selected them."""

    role: str
    members: tuple[AuthorTimeline, ...]
    window: WindowSpec
    coverage: float = 1.0
    anchor_total: int = 0
    _panel: Panel | None = field(default=None, compare=False, repr=False)

    def __len__(self):
        return len(self.members)

    @cached_property
    def panel(self) -> Panel:
        if self._panel is not None:
            return self._panel
        return Panel.from_timelines(self.members, self.window.T0, self.window.T2)


def _anchor_and_eligible(panel: Panel, spec: WindowSpec, role: str):
    t = spec.cutpoints
    if role == "training":
        anchor = panel.h(t[spec.L - 1]) >= 1
        return anchor, anchor
    if role == "validation":
        anchor = panel.pubs_in(t[spec.U - 1], t[spec.U]) >= 1
        return anchor, anchor
    if role == "test":
        # [t_X, t_{X+1}) in whole years
        anchor = panel.pubs_in(t[spec.X] - 1, t[spec.X + 1] - 1) >= 1
        eligible = (
            anchor
            & (panel.h(t[spec.X]) <= spec.I1)
            & (panel.max_annual(t[spec.X], t[spec.Z]) <= spec.M)
        )
        return anchor, eligible
    raise ValueError(f"unknown role {role!r}; expected one of {ROLES}")


def slice_dataset(timelines: Mapping[str, AuthorTimeline], spec: WindowSpec,
                  role: str) -> DatasetSlice:
    """Select the researchers eligible for ``role``.

    Eligibility rules:

    * training: at least one publication in ``[T0, t_{L-1}]``;
    * validation: at least one publication in ``(t_{U-1}, t_U]``;
    * test: at least one publication in ``[t_X, t_{X+1})``, at most ``I1``
      publications in ``[T0, t_X]`` and at most ``M`` in any single year of
      ``[t_X, t_Z]``.

    ``coverage`` is the eligible fraction of researchers active in the
    role's anchor interval.
    """
    timelines = list(timelines.values())
    panel = Panel.from_timelines(timelines, spec.T0, spec.T2)
    anchor, eligible = _anchor_and_eligible(panel, spec, role)
    rows = np.flatnonzero(eligible)
    if rows.size == 0:
        raise ConfigError(f"the {role} slice is empty for this window")
    n_anchor = int(anchor.sum())
    return DatasetSlice(
        role=role,
        members=tuple(timelines[i] for i in rows),
        window=spec,
        coverage=rows.size / n_anchor,
        anchor_total=n_anchor,
        _panel=panel.subset(rows),
    )
