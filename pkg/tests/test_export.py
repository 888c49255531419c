"""Tests for CSV rendering and the figure sweeps."""

import numpy as np
import pytest

from app.schemas.pricing import Table1Row
from app.services.export.csv_export import (
    TABLE1_HEADER,
    format_value,
    render_csv,
    table1_records,
)
from app.services.export.sweeps import FIT_POINTS, SPOTS, SweepOptions, run_sweep
from app.services.pricing.errors import ParameterDomainError


def test_format_value():
    assert format_value(14.962931234567) == "14.9629312"
    assert format_value(None) == ""
    assert format_value(15) == "15"
    assert format_value("chebyshev") == "chebyshev"


def test_render_table1_csv():
    rows = [
        Table1Row(rho=-0.3, mc=14.9734, mc_std_error=0.004, taylor2=15.0065, cheb15=14.96293),
        Table1Row(rho=0.3, taylor2=12.7901, cheb15=12.7),
    ]
    text = render_csv(TABLE1_HEADER, table1_records(rows))
    assert text == "rho,mc,taylor2,cheb15\n-0.3,14.9734,15.0065,14.96293\n0.3,,12.7901,12.7\n"


def test_unknown_sweep(model, spread):
    with pytest.raises(ParameterDomainError):
        run_sweep("volatility_smile", model, spread)


def test_delta2_surface_signs(model, spread):
    header, rows = run_sweep("delta2_surface", model, spread)
    assert header[:2] == ("s1", "s2")
    assert len(rows) == len(SPOTS) ** 2
    deltas = np.array([row[-1] for row in rows])
    assert np.all((deltas < 0.0) & (deltas > -1.0))


def test_cond_fit_high_orders_track_conditional_price(model, spread):
    header, rows = run_sweep("cond_fit", model, spread)
    assert len(rows) == FIT_POINTS
    table = np.array(rows, dtype=float)
    exact = table[:, header.index("conditional")]
    cheb4 = table[:, header.index("cheb4")]
    cheb15 = table[:, header.index("cheb15")]
    bern4 = table[:, header.index("bern4")]
    bern200 = table[:, header.index("bern200")]
    assert np.max(np.abs(cheb15 - exact)) < np.max(np.abs(cheb4 - exact))
    assert np.max(np.abs(bern200 - exact)) < np.max(np.abs(bern4 - exact))


def test_converge_errors_shrink_for_chebyshev(model, spread):
    header, rows = run_sweep("converge", model, spread)
    assert header == ("method", "order", "quad_points", "price", "error")
    cheb = {row[1]: abs(row[4]) for row in rows if row[0] == "chebyshev" and row[2] == 100}
    assert cheb[16] < cheb[4]


def test_sweep_options_reach_the_grid(model, spread):
    _, default = run_sweep("strike_maturity", model, spread)
    _, custom = run_sweep(
        "strike_maturity", model, spread, SweepOptions(order=6, quad_points=40, tail="flat")
    )
    assert len(custom) == len(default)
    assert custom != default


def test_cond_fit_uses_window_override(model, spread):
    header, rows = run_sweep("cond_fit", model, spread, SweepOptions(window_a=-1.0, window_b=1.0))
    ys = [row[header.index("y")] for row in rows]
    assert ys[0] == -1.0 and ys[-1] == 1.0
