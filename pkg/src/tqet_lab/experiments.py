"""Parameter sweeps: (g, h) heatmaps, N-scaling of efficiency and energy ratios.

Every cell builds its own chain and is independent of the others, so sweeps
fan out over a process pool; results are always returned in grid order.
Per-cell problems are recorded as flags instead of aborting the sweep.
"""
from __future__ import annotations

import datetime as _dt
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, TqetError
from .model import ChainSpec
from .protocol import INPUT_FLOOR, ece, run_trace

QET_FLOOR = 1e-12
G_FLOOR = 1e-9
DEFAULT_GRID = np.linspace(-2.0, 2.0, 41)
DEFAULT_N_VALUES = tuple(range(4, 11))
FIXED_DISTANCE = 2

CELL_COLUMNS = (
    "e_qet",
    "min_t_e_tqet",
    "min_t_de",
    "min_t_de_restricted",
    "eta_tqet",
    "eta_qet",
    "ratio",
    "net_ratio",
)


@dataclass
class Cell:
    """One sweep point. NaN marks a quantity that is undefined for the cell."""

    e_qet: float = math.nan
    min_t_e_tqet: float = math.nan
    min_t_de: float = math.nan
    min_t_de_restricted: float = math.nan
    eta_tqet: float = math.nan
    eta_qet: float = math.nan
    ratio: float = math.nan
    net_ratio: float = math.nan
    flags: list[str] = field(default_factory=list)

    @property
    def flag(self) -> str:
        return "|".join(self.flags) if self.flags else "ok"

    @property
    def degenerate(self) -> bool:
        return bool(self.flags)


@dataclass
class SweepResult:
    kind: str
    axis_names: tuple[str, ...]
    points: list[tuple]
    cells: list[Cell]
    base: ChainSpec
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(c, name) for c in self.cells], dtype=float)

    def rows(self):
        for point, cell in zip(self.points, self.cells):
            yield point, cell


def evaluate_cell(spec: ChainSpec) -> Cell:
    """Run one optimized trace and reduce it to the sweep quantities."""
    cell = Cell()
    try:
        tr = run_trace(spec)
    except TqetError as exc:
        cell.flags.append(f"error:{type(exc).__name__}")
        return cell
    cell.e_qet = tr.e_qet
    cell.min_t_e_tqet = float(np.min(tr.e_tqet_opt))
    cell.min_t_de = float(np.min(tr.de_min))
    teleporting = tr.e_tqet_opt < 0
    if np.any(teleporting):
        cell.min_t_de_restricted = float(np.min(tr.de_min[teleporting]))
    else:
        cell.flags.append("no_negative_tqet")
    if abs(spec.g) < G_FLOOR or tr.e_input <= INPUT_FLOOR:
        cell.flags.append("degenerate_input")
    else:
        cell.eta_tqet, cell.eta_qet = ece(tr)
    if tr.e_qet < -QET_FLOOR:
        cell.ratio = cell.min_t_e_tqet / tr.e_qet
        cell.net_ratio = cell.min_t_de_restricted / tr.e_qet
    else:
        cell.flags.append("qet_zero")
    return cell


def _invalid_cell(reason: str) -> Cell:
    return Cell(flags=[f"invalid_geometry:{reason}"])


def _run_cells(specs: list, workers: int) -> list[Cell]:
    todo = [(k, s) for k, s in enumerate(specs) if isinstance(s, ChainSpec)]
    out: list[Cell] = [s if isinstance(s, Cell) else None for s in specs]
    if workers <= 1 or len(todo) <= 1:
        results = [evaluate_cell(s) for _, s in todo]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate_cell, [s for _, s in todo], chunksize=max(1, len(todo) // (4 * workers))))
    for (k, _), cell in zip(todo, results):
        out[k] = cell
    return out


def _metadata(base: ChainSpec, **extra) -> dict:
    meta = {
        "base": asdict(base),
        "t_max": base.t_max,
        "dt": base.dt,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    meta.update(extra)
    return meta


def sweep_gh(base: ChainSpec, g_grid=DEFAULT_GRID, h_grid=DEFAULT_GRID, workers: int = 1) -> SweepResult:
    """QET vs optimized TQET energy on a (g, h) grid; g-major ordering."""
    g_grid = [float(x) for x in g_grid]
    h_grid = [float(x) for x in h_grid]
    if not g_grid or not h_grid:
        raise ConfigError("sweep grids must be non-empty")
    points = [(g, h) for g in g_grid for h in h_grid]
    specs = [base.with_(g=g, h=h) for g, h in points]
    return SweepResult("gh", ("g", "h"), points, _run_cells(specs, workers), base, _metadata(base))


def _geometry_specs(base: ChainSpec, n_values, site_b_rule) -> tuple[list, list]:
    points, specs = [], []
    for n in n_values:
        n = int(n)
        points.append((n,))
        try:
            specs.append(base.with_(n_sites=n, site_a=2, site_b=site_b_rule(n)))
        except ConfigError as exc:
            specs.append(_invalid_cell(str(exc).split(":")[0]))
    return points, specs


def scale_ece(base: ChainSpec, n_values=DEFAULT_N_VALUES, workers: int = 1) -> SweepResult:
    """Efficiencies versus N with Alice at site 2 and Bob at N-1."""
    points, specs = _geometry_specs(base, n_values, lambda n: n - 1)
    return SweepResult("ece", ("N",), points, _run_cells(specs, workers), base, _metadata(base))


def scale_ratio(base: ChainSpec, n_values=DEFAULT_N_VALUES, workers: int = 1) -> SweepResult:
    """``min_t E_TQET / E_QET`` versus N with Alice at 2 and Bob at N-1 (distance grows)."""
    points, specs = _geometry_specs(base, n_values, lambda n: n - 1)
    return SweepResult("ratio", ("N",), points, _run_cells(specs, workers), base, _metadata(base))


def fixed_distance(base: ChainSpec, n_values=DEFAULT_N_VALUES, workers: int = 1, distance: int = FIXED_DISTANCE) -> SweepResult:
    """QET energy against the teleportation-restricted minimum of dE_min at constant distance."""
    points, specs = _geometry_specs(base, n_values, lambda n: 2 + distance)
    return SweepResult(
        "fixed", ("N",), points, _run_cells(specs, workers), base, _metadata(base, distance=distance)
    )


SWEEPS = {"gh": sweep_gh, "ece": scale_ece, "ratio": scale_ratio, "fixed": fixed_distance}
