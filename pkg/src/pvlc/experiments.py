"""Sweep harness: tabulate model curves and Monte-Carlo BER grids as CSV.

Every BER cell derives its seed from the base seed and its operating
coordinates (see `pvlc.seeding`), so re-running any single cell in
isolation reproduces it bit-for-bit and parallel execution is
indistinguishable from serial.  Repeated cells are summarized by their
median BER.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .compensation import PostDistortionConfig, post_distort
from .device import (
    ModuleSpec,
    PVCellParams,
    first_derivative,
    module_voltage,
    second_derivative,
)
from .link import FEC_BER_THRESHOLD, LinkConfig, run_link
from .seeding import payload_bits, point_seed

# Committed defaults for reproducing the study's sweep families.
DEFAULT_MODULE = ModuleSpec(cell_count=1, params=PVCellParams(n=1.5, i0=1e-10, eta=2e-9))
RESPONSE_LUX_GRID = tuple(np.arange(0.0, 2001.0, 10.0))
RESPONSE_CELL_COUNTS = (1, 2, 4, 8)
M_GRID = (0.05, 0.10, 0.15, 0.20, 0.30, 0.40, 0.45)
BER_VS_M_ILLUMINANCES = (200.0, 350.0, 500.0, 650.0)
TX_PRESETS_LUX = (200.0, 350.0, 425.0, 500.0, 650.0)
DCL_GRID = tuple(np.arange(0.0, 1501.0, 50.0))
DCL_M_LIST = (0.2, 0.3, 0.4)
POSTDIST_M_GRID = (0.2, 0.25, 0.3, 0.35, 0.4)
POSTDIST_TX_LUX = 350.0
REPETITIONS = 5
PAYLOAD_SYMBOLS = 250_000

CSV_HEADERS = {
    "response": ("lux", "cells", "volts"),
    "derivatives": ("lux", "cells", "dv", "d2v"),
    "ber_vs_m": ("tx_dc_lux", "mod_index", "ber", "pass_fec"),
    "ber_vs_dcl": ("mod_index", "dcl_lux", "ber"),
    "postdist": ("mod_index", "ber_plain", "ber_compensated"),
}


def _check_grid(grid, name):
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError(f"{name} must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"{name} must be strictly ascending")
    return grid


def sweep_response(lux_grid, cell_counts, spec: ModuleSpec):
    """DC response table: rows of (lux, cells, volts)."""
    lux_grid = np.asarray(list(lux_grid), dtype=float)
    rows = []
    for cells in cell_counts:
        module = replace(spec, cell_count=int(cells))
        volts = module_voltage(lux_grid, module)
        rows.extend((float(l), int(cells), float(v)) for l, v in zip(lux_grid, volts))
    return rows


def sweep_derivatives(lux_grid, cell_counts, spec: ModuleSpec, form: str = "exact"):
    """Response slope and curvature table: rows of (lux, cells, dv, d2v)."""
    lux_grid = np.asarray(list(lux_grid), dtype=float)
    rows = []
    for cells in cell_counts:
        module = replace(spec, cell_count=int(cells))
        dv = first_derivative(lux_grid, module, form)
        d2v = second_derivative(lux_grid, module, form)
        rows.extend(
            (float(l), int(cells), float(a), float(b))
            for l, a, b in zip(lux_grid, dv, d2v)
        )
    return rows


def _ber_cell(args):
    """One link run; module-level so process pools can pickle it.

    The payload travels as (n_bits, base_seed) and is regenerated in the
    worker, which is cheaper than shipping the bit array itself.
    """
    config, spec, n_bits, base_seed, postdist_cfg = args
    payload = payload_bits(n_bits, base_seed)
    postprocess = None
    if postdist_cfg is not None:
        postprocess = lambda v: post_distort(v, spec, postdist_cfg)
    return run_link(config, spec, payload, postprocess=postprocess).ber


def _run_cells(cells, n_jobs):
    if n_jobs <= 1:
        return [_ber_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_ber_cell, cells, chunksize=1))


def _median_over_reps(bers, repetitions):
    grouped = np.asarray(bers, dtype=float).reshape(-1, repetitions)
    return np.median(grouped, axis=1)


def ber_point_config(base_config: LinkConfig, tx_dc_lux, mod_index, dcl_lux, rep):
    """The exact LinkConfig a sweep uses for one cell (exposed for re-runs)."""
    return replace(
        base_config,
        tx_dc_lux=float(tx_dc_lux),
        mod_index=float(mod_index),
        dcl_lux=float(dcl_lux),
        seed=point_seed(base_config.seed, float(tx_dc_lux), float(mod_index), float(dcl_lux), rep),
    )


def sweep_ber_vs_m(
    m_grid,
    illuminance_list,
    base_config: LinkConfig,
    spec: ModuleSpec,
    repetitions: int = REPETITIONS,
    payload_symbols: int = PAYLOAD_SYMBOLS,
    n_jobs: int = 1,
):
    """Median BER per (tx illuminance, modulation index) grid point."""
    m_grid = _check_grid(m_grid, "m_grid")
    if any(not 0 < m <= 1 for m in m_grid):
        raise ValueError("m_grid values must lie in (0, 1]")
    illuminance_list = _check_grid(illuminance_list, "illuminance_list")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    cells = [
        (ber_point_config(base_config, tx, m, base_config.dcl_lux, rep), spec,
         2 * payload_symbols, base_config.seed, None)
        for tx in illuminance_list
        for m in m_grid
        for rep in range(repetitions)
    ]
    medians = _median_over_reps(_run_cells(cells, n_jobs), repetitions)
    points = [(tx, m) for tx in illuminance_list for m in m_grid]
    return [
        (tx, m, float(ber), int(ber < FEC_BER_THRESHOLD))
        for (tx, m), ber in zip(points, medians)
    ]


def sweep_ber_vs_dcl(
    dcl_grid,
    m_list,
    base_config: LinkConfig,
    spec: ModuleSpec,
    repetitions: int = REPETITIONS,
    payload_symbols: int = PAYLOAD_SYMBOLS,
    n_jobs: int = 1,
):
    """Median BER per (modulation index, compensation-light illuminance)."""
    dcl_grid = _check_grid(dcl_grid, "dcl_grid")
    if any(d < 0 for d in dcl_grid):
        raise ValueError("dcl_grid values must be >= 0")
    m_list = _check_grid(m_list, "m_list")
    cells = [
        (ber_point_config(base_config, base_config.tx_dc_lux, m, dcl, rep), spec,
         2 * payload_symbols, base_config.seed, None)
        for m in m_list
        for dcl in dcl_grid
        for rep in range(repetitions)
    ]
    medians = _median_over_reps(_run_cells(cells, n_jobs), repetitions)
    points = [(m, dcl) for m in m_list for dcl in dcl_grid]
    return [(m, dcl, float(ber)) for (m, dcl), ber in zip(points, medians)]


def sweep_postdistortion(
    m_grid,
    base_config: LinkConfig,
    spec: ModuleSpec,
    gain_cap: float = 4.0,
    repetitions: int = REPETITIONS,
    payload_symbols: int = PAYLOAD_SYMBOLS,
    n_jobs: int = 1,
):
    """Plain versus post-distorted BER on identical noise realizations."""
    m_grid = _check_grid(m_grid, "m_grid")
    cells = []
    for m in m_grid:
        for rep in range(repetitions):
            config = ber_point_config(base_config, base_config.tx_dc_lux, m, base_config.dcl_lux, rep)
            operating = config.tx_dc_lux + config.dcl_lux + config.ambient_lux
            postdist = PostDistortionConfig(operating_lux=operating, gain_cap=gain_cap)
            cells.append((config, spec, 2 * payload_symbols, base_config.seed, None))
            cells.append((config, spec, 2 * payload_symbols, base_config.seed, postdist))
    bers = np.asarray(_run_cells(cells, n_jobs), dtype=float).reshape(len(m_grid), repetitions, 2)
    rows = []
    for m, pair in zip(m_grid, bers):
        plain = float(np.median(pair[:, 0]))
        compensated = float(np.median(pair[:, 1]))
        rows.append((m, plain, compensated))
    return rows


def export_eye(v, samples_per_symbol: int, traces: int):
    """Overlapped two-symbol-wide waveform traces for eye-diagram plotting.

    Consecutive traces advance by one symbol, so adjacent rows overlap by
    half their width.  Returns a (traces, 2*samples_per_symbol) array.
    """
    v = np.asarray(v, dtype=float)
    if traces < 1:
        raise ValueError("traces must be >= 1")
    if v.size < traces * 2 * samples_per_symbol:
        raise ValueError(
            f"waveform has {v.size} samples, need at least {traces * 2 * samples_per_symbol}"
        )
    width = 2 * samples_per_symbol
    return np.stack([v[k * samples_per_symbol : k * samples_per_symbol + width] for k in range(traces)])


def _format_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(destination, header, rows):
    """Write a table with 17-significant-digit floats (stable schema)."""
    with open(destination, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_format_cell(cell) for cell in row) + "\n")


def write_eye_csv(eye_matrix, destination):
    """Eye traces as CSV, one trace per row, columns s0..s{2*sps-1}."""
    eye_matrix = np.asarray(eye_matrix, dtype=float)
    header = tuple(f"s{k}" for k in range(eye_matrix.shape[1]))
    write_csv(destination, header, eye_matrix)
