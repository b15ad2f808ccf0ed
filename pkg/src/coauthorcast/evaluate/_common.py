from __future__ import annotations

import io

import numpy as np

from coauthorcast.corpus import WindowSpec
from coauthorcast.errors import ConfigError


def evaluation_years(spec: WindowSpec, years=None) -> list[int]:
    """Years ``t_Y .. t_Z`` unless given explicitly."""
    if years is None:
        return list(spec.cutpoints[spec.Y:spec.Z + 1])
    years = sorted(int(y) for y in years)
    if not years:
        raise ConfigError("no evaluation years")
    return years


def forecast_index(forecasts):
    return {f.author: f for f in forecasts}


def tidy_csv(header, rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_cell(v) for v in row) + "\n")
    return out.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)
