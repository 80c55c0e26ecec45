"""Tabulate the module's DC response and its derivatives.

The open-circuit voltage grows logarithmically with illuminance, so the
curve is steep (and strongly curved) in dim light and flattens as the
light level rises.  Stacking cells in series scales voltage, slope, and
curvature by the cell count without changing the shape.

Writes out/response.csv and out/derivatives.csv.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from pvlc.device import first_derivative, module_voltage, second_derivative
from pvlc.experiments import (
    CSV_HEADERS,
    DEFAULT_MODULE,
    RESPONSE_CELL_COUNTS,
    RESPONSE_LUX_GRID,
    sweep_derivatives,
    sweep_response,
    write_csv,
)

out = Path("out")
out.mkdir(exist_ok=True)

rows = sweep_response(RESPONSE_LUX_GRID, RESPONSE_CELL_COUNTS, DEFAULT_MODULE)
write_csv(out / "response.csv", CSV_HEADERS["response"], rows)

lux_grid = np.asarray(RESPONSE_LUX_GRID)
deriv_rows = sweep_derivatives(lux_grid[lux_grid > 0], RESPONSE_CELL_COUNTS, DEFAULT_MODULE)
write_csv(out / "derivatives.csv", CSV_HEADERS["derivatives"], deriv_rows)

print("single cell voltage:")
for lux in (100.0, 250.0, 1000.0, 2000.0):
    print(f"  V({lux:6.0f} lux) = {module_voltage(lux, DEFAULT_MODULE):.4f} V")

print("\nvoltage is proportional to the cell count (shown at 250 lux):")
base = module_voltage(250.0, DEFAULT_MODULE)
for cells in RESPONSE_CELL_COUNTS:
    spec = replace(DEFAULT_MODULE, cell_count=cells)
    print(f"  {cells} cells: {module_voltage(250.0, spec):.4f} V = {cells} x {base:.4f} V")

print("\nslope and curvature fall with illuminance (single cell):")
for lux in (50.0, 250.0, 1000.0):
    dv = first_derivative(lux, DEFAULT_MODULE)
    d2v = second_derivative(lux, DEFAULT_MODULE)
    print(f"  L={lux:6.0f} lux: dV/dL = {dv:.3e} V/lux, d2V/dL2 = {d2v:.3e} V/lux^2")

print(f"\nwrote {out / 'response.csv'} and {out / 'derivatives.csv'}")
