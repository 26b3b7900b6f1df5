"""Analysis dispatch: run a validated config, emit reports and CSV files.

Reports are plain dicts with three blocks: the config echo, the
results, and a provenance block (tool version, seed, wall clock,
resolution ladder).  Identical configs produce byte-identical report
JSON except for the provenance block, which carries the timestamps.
Numeric results are tagged "estimate" or "exact".
"""

import csv
import json
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .certify import (
    Counterexample,
    GridSpec,
    Splitting,
    certify_fibred_expansion,
    certify_uniform_expansion,
)
from .config import (
    CertifyAnalysis,
    ExperimentConfig,
    ExtremalAnalysis,
    FibredAnalysis,
    OrbitAnalysis,
    SpectrumAnalysis,
    build_system,
)
from .dynamics import ToralEndomorphism
from .ergodic_opt import (
    SpherePartition,
    build_transition_graph,
    estimate_extremal_exponents,
    periodic_orbits,
)
from .errors import ConfigError, CriticalPointEncountered
from .sphere_bundle import SphereBundlePoint, birkhoff_average, direct_growth_rate, lyapunov_spectrum

STATUS_OK = "ok"
STATUS_COUNTEREXAMPLE = "counterexample"
STATUS_CRITICAL = "critical_point"

EXIT_CODES = {STATUS_OK: 0, STATUS_COUNTEREXAMPLE: 2, STATUS_CRITICAL: 3}
EXIT_CONFIG_ERROR = 4


def _tagged(value, tag):
    return {"value": float(value), "tag": tag}


def _run_orbit(sys, spec: OrbitAnalysis, seed):
    p = SphereBundlePoint(spec.start, spec.direction)
    avg, record = birkhoff_average(sys, p, spec.steps, return_record=True)
    direct = direct_growth_rate(sys, p, spec.steps)
    return {
        "birkhoff_average": _tagged(avg, "estimate"),
        "direct_growth_rate": _tagged(direct, "estimate"),
        "steps": spec.steps,
        "orbit_table": {"header": record.csv_header(), "rows": record.csv_rows()},
    }, None


def _run_spectrum(sys, spec: SpectrumAnalysis, seed):
    exps = lyapunov_spectrum(sys, spec.start, spec.steps)
    return {
        "exponents": [_tagged(v, "estimate") for v in exps],
        "steps": spec.steps,
    }, None


def _run_extremal(sys, spec: ExtremalAnalysis, seed):
    ndir = spec.direction_resolution
    if ndir is None:
        ndir = 2 if sys.dim == 1 else 32
    ladder = []
    graph_rows = None
    resolutions = [spec.base_resolution * (2 ** i) for i in range(spec.refinements)]
    for res in resolutions:
        part = SpherePartition(res, ndir)
        graph = build_transition_graph(sys, part, spec.samples_per_cell, seed=seed)
        est = estimate_extremal_exponents(
            sys, part, spec.samples_per_cell, seed=seed, graph=graph
        )
        ladder.append(est.to_json_dict())
        if spec.dump_graph and res == resolutions[-1]:
            graph_rows = {"header": graph.csv_header(), "rows": graph.csv_rows()}
    final = ladder[-1]
    results = {
        "min_estimate": _tagged(final["min_estimate"], "estimate"),
        "max_estimate": _tagged(final["max_estimate"], "estimate"),
        "min_cycle": final["min_cycle"],
        "max_cycle": final["max_cycle"],
        "phi_oscillation": _tagged(final["phi_oscillation"], "exact"),
        "ladder": ladder,
    }
    if graph_rows is not None:
        results["graph"] = graph_rows
    if spec.max_period is not None:
        orbits = periodic_orbits(sys, spec.max_period)
        table = [o.to_json_dict() for o in orbits]
        all_exps = [e for o in orbits for e in o.exponents]
        results["periodic_oracle"] = {
            "max_period": spec.max_period,
            "orbit_count": len(orbits),
            "orbits": table,
            "min_exponent": _tagged(min(all_exps), "exact"),
            "max_exponent": _tagged(max(all_exps), "exact"),
        }
    return results, [
        {"base_resolution": entry["base_resolution"],
         "min_estimate": entry["min_estimate"],
         "max_estimate": entry["max_estimate"]}
        for entry in ladder
    ]


def _run_certify(sys, spec: CertifyAnalysis, seed):
    grid = GridSpec(spec.base_samples, spec.direction_samples)
    outcome = certify_uniform_expansion(
        sys, spec.lam, spec.big_n, n_max=spec.n_max, grid=grid,
        retain_margins=spec.retain_margins,
    )
    blob = outcome.to_json_dict()
    blob["seed"] = seed
    results = {"certification": blob}
    status = STATUS_OK if not isinstance(outcome, Counterexample) else STATUS_COUNTEREXAMPLE
    return results, status


def _splitting_from_spec(sys, sub):
    if isinstance(sub, str):
        if sub in ("unstable", "stable"):
            if not isinstance(sys, ToralEndomorphism):
                raise ConfigError("eigen splittings need a toral_endomorphism map")
            return Splitting.from_eigenvectors(sys, expanding_first=(sub == "unstable"))
        if sub in ("axis0", "axis1"):
            return Splitting.coordinate_axis(int(sub[-1]))
        raise ConfigError(f"unknown subbundle {sub!r}")
    b1, b2 = sub
    return Splitting.constant(b1, b2, label="custom")


def _run_fibred(sys, spec: FibredAnalysis, seed):
    sp = _splitting_from_spec(sys, spec.subbundle)
    grid = GridSpec(spec.base_samples, spec.direction_samples)
    fc = certify_fibred_expansion(
        sys, sp, spec.lam, spec.big_n, n_max=spec.n_max, grid=grid,
        retain_margins=spec.retain_margins, check_samples=spec.check_samples,
        tol_angle=spec.tol_angle, restricted_resolution=spec.restricted_resolution,
        seed=seed,
    )
    blob = fc.to_json_dict()
    blob["result"]["seed"] = seed
    results = {"fibred_certification": blob}
    status = STATUS_OK if fc.is_certificate else STATUS_COUNTEREXAMPLE
    return results, status


def run(config: ExperimentConfig) -> dict:
    """Execute one experiment and return its report dict.

    Domain outcomes (certificate found, counterexample found, critical
    point hit) are reported through the ``status`` field; only config
    problems raise.
    """
    sys_ = build_system(config.map)
    started = time.perf_counter()
    status = STATUS_OK
    ladder = None
    error = None
    results = {}
    try:
        spec = config.analysis
        if isinstance(spec, OrbitAnalysis):
            results, _ = _run_orbit(sys_, spec, config.seed)
        elif isinstance(spec, SpectrumAnalysis):
            results, _ = _run_spectrum(sys_, spec, config.seed)
        elif isinstance(spec, ExtremalAnalysis):
            results, ladder = _run_extremal(sys_, spec, config.seed)
        elif isinstance(spec, CertifyAnalysis):
            results, status = _run_certify(sys_, spec, config.seed)
        elif isinstance(spec, FibredAnalysis):
            results, status = _run_fibred(sys_, spec, config.seed)
        else:  # pragma: no cover - exhaustive over the union
            raise ConfigError(f"unhandled analysis kind {spec.kind!r}")
    except CriticalPointEncountered as exc:
        status = STATUS_CRITICAL
        error = {
            "type": "CriticalPointEncountered",
            "message": str(exc),
            "step": exc.step,
            "cell": exc.cell,
            "point": list(exc.point) if exc.point is not None else None,
        }
    elapsed = time.perf_counter() - started
    report = {
        "status": status,
        "config": config.canonical_dict(),
        "results": _plain(results),
        "provenance": {
            "tool": "lyapcert",
            "version": __version__,
            "seed": config.seed,
            "wall_clock_seconds": elapsed,
            "timestamp_utc": datetime.now(timezone.utc).isoformat(),
            "resolution_ladder": ladder,
        },
    }
    if error is not None:
        report["error"] = _plain(error)
    return report


def _plain(obj):
    """Recursively convert numpy scalars/arrays to plain Python values."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def report_json(report: dict, drop_provenance: bool = False) -> str:
    """Canonical JSON for a report; stable byte-for-byte given equal content."""
    data = {k: v for k, v in report.items() if not (drop_provenance and k == "provenance")}
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def emit(report: dict, out_dir) -> list:
    """Write report.json plus plot-ready CSV side files; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "report.json"
    path.write_text(report_json(report), encoding="utf-8")
    written.append(path)

    results = report.get("results", {})
    if "orbit_table" in results:
        tbl = results["orbit_table"]
        path = out / "orbit.csv"
        _write_csv(path, tbl["header"], tbl["rows"])
        written.append(path)
    if "ladder" in results:
        path = out / "refinement.csv"
        rows = [
            [entry["base_resolution"], repr(entry["min_estimate"]), repr(entry["max_estimate"])]
            for entry in results["ladder"]
        ]
        _write_csv(path, ["resolution", "min_estimate", "max_estimate"], rows)
        written.append(path)
    if "graph" in results:
        path = out / "graph_edges.csv"
        _write_csv(path, results["graph"]["header"], results["graph"]["rows"])
        written.append(path)
    if "certification" in results:
        path = out / "certificate.json"
        path.write_text(
            json.dumps(results["certification"], sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        written.append(path)
    if "fibred_certification" in results:
        path = out / "certificate.json"
        path.write_text(
            json.dumps(results["fibred_certification"], sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        written.append(path)
    if "periodic_oracle" in results:
        path = out / "periodic_orbits.csv"
        rows = []
        for orbit in results["periodic_oracle"]["orbits"]:
            rows.append([
                orbit["period"],
                ";".join(repr(c) for pt in orbit["points"] for c in pt),
                ";".join(repr(e) for e in orbit["exponents"]),
            ])
        _write_csv(path, ["period", "points", "exponents"], rows)
        written.append(path)
    return written
