import random

import numpy as np
import pytest

from tqet_lab.experiments import (
    CELL_COLUMNS,
    evaluate_cell,
    fixed_distance,
    scale_ece,
    scale_ratio,
    sweep_gh,
)
from tqet_lab.model import ChainSpec
from tqet_lab.protocol import ece, run_trace

BASE = ChainSpec(6)
N_VALUES = range(4, 11)


@pytest.fixture(scope="module")
def small_gh():
    return sweep_gh(BASE, g_grid=[-1.05, 0.0, 1.0], h_grid=[0.0, 0.5])


@pytest.fixture(scope="module")
def ratio_sweep():
    return scale_ratio(BASE, N_VALUES)


@pytest.fixture(scope="module")
def fixed_sweep():
    return fixed_distance(BASE, N_VALUES)


def _same(a, b):
    return all(
        np.array_equal(a.column(k), b.column(k), equal_nan=True) for k in CELL_COLUMNS
    ) and [c.flag for c in a.cells] == [c.flag for c in b.cells]


def test_gh_ordering_and_flags(small_gh):
    assert small_gh.points[:2] == [(-1.05, 0.0), (-1.05, 0.5)]
    cell = dict(small_gh.rows())[(0.0, 0.0)]
    assert abs(cell.e_qet) < 1e-12 and abs(cell.min_t_e_tqet) < 1e-12
    assert "degenerate_input" in cell.flag and "qet_zero" in cell.flag
    assert small_gh.metadata["dt"] == BASE.dt and "timestamp" in small_gh.metadata


def test_gh_dominance(small_gh):
    for _, c in small_gh.rows():
        assert c.min_t_e_tqet <= c.e_qet + 1e-12
        assert c.min_t_de <= 1e-12


def test_gh_workers_invariant(small_gh):
    par = sweep_gh(BASE, g_grid=[-1.05, 0.0, 1.0], h_grid=[0.0, 0.5], workers=2)
    assert _same(small_gh, par)


def test_cell_recomputation(small_gh):
    k = random.Random(7).randrange(len(small_gh.cells))
    g, h = small_gh.points[k]
    tr = run_trace(BASE.with_(g=g, h=h))
    cell = small_gh.cells[k]
    assert cell.e_qet == pytest.approx(tr.e_qet, abs=1e-10)
    assert cell.min_t_e_tqet == pytest.approx(np.min(tr.e_tqet_opt), abs=1e-10)
    assert evaluate_cell(BASE.with_(g=g, h=h)).flag == cell.flag


def test_invalid_geometry_flagged(ratio_sweep):
    first = ratio_sweep.cells[0]
    assert ratio_sweep.points[0] == (4,)
    assert first.flag.startswith("invalid_geometry")
    assert np.isnan(first.ratio)


def test_ratio_monotone(ratio_sweep):
    ratios = ratio_sweep.column("ratio")[1:]
    assert np.all(ratios >= 1)
    assert np.all(np.diff(ratios) > 0)


def test_ratio_n6_matches_pipeline(ratio_sweep):
    tr = run_trace(ChainSpec(6, site_a=2, site_b=5))
    cell = dict(ratio_sweep.rows())[(6,)]
    assert cell.ratio == pytest.approx(np.min(tr.e_tqet_opt) / tr.e_qet, rel=1e-12)


def test_ece_sweep_consistent():
    res = scale_ece(BASE, [5, 6, 8, 9, 10])
    eta_t, eta_q = res.column("eta_tqet"), res.column("eta_qet")
    assert np.all(eta_t >= eta_q)
    assert np.all(np.abs(np.diff(eta_t[-3:])) < 0.1)
    assert eta_t[1] == pytest.approx(ece(run_trace(BASE))[0], rel=1e-12)


def test_fixed_distance_dominance(fixed_sweep):
    for (n,), c in fixed_sweep.rows():
        if n == 4:
            continue
        assert c.min_t_de_restricted <= c.e_qet
    assert fixed_sweep.metadata["distance"] == 2


@pytest.mark.xfail(strict=True, reason="gap is not constant across N in exact diagonalization at distance 2")
def test_fixed_distance_gap_constant(fixed_sweep):
    gaps = np.array([c.e_qet - c.min_t_de_restricted for (n,), c in fixed_sweep.rows() if n >= 5])
    assert (gaps.max() - gaps.min()) / gaps.mean() < 0.25
