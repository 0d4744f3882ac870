"""Scenario runs, seeded suites and curve emission."""

from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..bvp1d.flow import (
    Scenario,
    cauchy_gap_profile,
    maslov_side,
    sf_oracle,
    spectral_flow,
    verify_gsff,
)
from ..maslov import winding_oracle
from ..sympcore import same_span
from .catalog import CATALOG, catalog_scenario, random_scenario
from .report import csv_text
from .schema import load_json, parse_scenario


def load_scenario(ref: str, step: float | None = None) -> Scenario:
    """Scenario from a JSON file, or a catalog entry by name."""
    if ref in CATALOG and not Path(ref).exists():
        sc = catalog_scenario(ref)
    else:
        stem = Path(ref).stem
        sc = parse_scenario(load_json(ref), label=None)
        sc.label = sc.label or stem
    sc.step = step
    return sc


def run_scenario(ref, crossings: bool = False, timings: bool = False, step=None):
    """:func:`verify_gsff` on a scenario file or catalog name."""
    sc = ref if isinstance(ref, Scenario) else load_scenario(ref, step)
    return verify_gsff(sc, crossings=crossings, timings=timings)


def suite_row(sc: Scenario) -> dict:
    sf, _ = spectral_flow(sc)
    oracle = sf_oracle(sc)
    mas, _ = maslov_side(sc)
    return {
        "label": sc.label,
        "seed": sc.seed,
        "sf_partition": sf,
        "sf_oracle": oracle,
        "maslov_partition": mas,
        "equal": bool(sf == oracle == -mas),
    }


def _seed_row(args):
    seed, m, step = args
    sc = random_scenario(seed, m)
    sc.step = step
    return suite_row(sc)


def _catalog_row(args):
    name, step = args
    sc = catalog_scenario(name)
    sc.step = step
    return suite_row(sc)


def run_suite(seeds=None, m: int = 2, jobs: int = 1, step=None) -> list[dict]:
    """Rows ``{label, seed, sf_partition, sf_oracle, maslov_partition, equal}`` sorted by label.

    ``seeds=None`` runs the built-in catalog instead of random scenarios.
    """
    if seeds is None:
        func, tasks = _catalog_row, [(name, step) for name in CATALOG]
    else:
        func, tasks = _seed_row, [(int(s), m, step) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(func, tasks))
    else:
        rows = [func(t) for t in tasks]
    return sorted(rows, key=lambda r: _natural_key(r["label"]))


def _natural_key(label: str):
    return [(0, int(tok), "") if tok.isdigit() else (1, 0, tok) for tok in re.findall(r"\d+|\D+", label)]


def eigenvalue_curves(sc: Scenario, samples: int | None = None):
    """``(header, rows)``: windowed eigenvalues on a uniform ``s`` grid, blank-padded."""
    ss = np.linspace(0.0, 1.0, (samples or sc.s_samples) + 1)
    vals = [sc.solver(float(s)) for s in ss]
    k = max((len(v) for v in vals), default=0)
    header = ["s"] + [f"lambda_{i + 1}" for i in range(k)]
    rows = [[float(s)] + [float(x) for x in v] + [""] * (k - len(v)) for s, v in zip(ss, vals)]
    return header, rows


def emit_curves(sc: Scenario, out_dir=".", samples: int | None = None) -> list[Path]:
    """Write eigenvalue curves, Cauchy gap increments and (for loops) the winding trace as CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    header, rows = eigenvalue_curves(sc, samples)
    written.append(_write(out / f"{sc.label}_eigenvalues.csv", csv_text(header, rows)))
    mids, inc = cauchy_gap_profile(sc, samples)
    written.append(_write(out / f"{sc.label}_cauchy_gap.csv",
                          csv_text(["s", "gap_increment"], zip(mids, inc))))
    # the winding trace needs a boundary loop against fixed Cauchy data
    if sc.boundary.is_loop and _cauchy_constant(sc):
        _, trace = winding_oracle(sc.boundary, sc.cauchy(0.0), sc.family(), return_trace=True)
        written.append(_write(out / f"{sc.label}_winding.csv",
                              csv_text(["s", "det_re", "det_im", "accumulated_arg"], trace)))
    return written


def _cauchy_constant(sc: Scenario) -> bool:
    return all(same_span(sc.cauchy(0.0), sc.cauchy(s), tol=1e-8) for s in (0.25, 0.5, 0.75, 1.0))


def _write(path: Path, text: str) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
