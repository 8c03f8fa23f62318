"""
Machine-readable reports: the census pipeline end to end, and JSON / CSV
serialization of census, basin and verification results.

JSON is canonical. Floats go through ``float.__repr__`` (shortest string
that round-trips exactly), keys are emitted in a fixed order and nothing
time- or host-dependent is recorded, so identical inputs give identical
bytes.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Optional

import numpy as np

from . import __version__
from .classify import Classification, classify
from .frame import build_frame
from .stationary import Census, StationaryPoint, census, to_eigenpair
from .tensor import from_frame

SCHEMA_VERSION = 1


def _floats(x) -> list:
    return [float(t) for t in np.asarray(x, dtype=float).ravel()]


def _classification_dict(c: Classification) -> dict:
    return {
        "verdict": c.verdict.value,
        "theory_verdict": c.theory_verdict.value,
        "theory_path": c.theory_path,
        "numeric_verdict": c.numeric_verdict.value if c.numeric_verdict else None,
        "l_value": c.l_value,
        "sigma_a": None if c.sigma_a is None else float(c.sigma_a),
        "sigma_b": None if c.sigma_b is None else float(c.sigma_b),
        "degenerate": c.degenerate,
        "note": c.note,
    }


def _spectrum_dict(c: Classification) -> dict:
    spec = c.spectrum
    return {
        "eigenvalues": _floats(spec.eigenvalues),
        "tangent_eigenvalues": _floats(c.tangent_eigenvalues),
        "tau": float(spec.tau),
        "signature": list(spec.signature),
    }


def point_record(sp: StationaryPoint, v: np.ndarray, lam: float,
                 cls: Classification) -> dict:
    return {
        "u": _floats(sp.u),
        "alpha": float(sp.alpha),
        "beta": float(sp.beta),
        "structure": sp.structure.as_dict() if sp.structure is not None else None,
        "kkt_residual": float(sp.kkt_residual),
        "v": _floats(v),
        "lambda": float(lam),
        "classification": _classification_dict(cls),
        "spectrum": _spectrum_dict(cls),
    }


def census_report(n: int, m: int, seed: int = 0, cen: Optional[Census] = None) -> dict:
    """
    Frame, tensor, enumeration, classification and v-space mapping for one
    (n, m). Raises whatever the pipeline's own consistency checks raise.
    """
    frame = build_frame(n)
    S = from_frame(frame, m)
    cen = census(n, m) if cen is None else cen
    points = []
    for sp in cen.points:
        ep = to_eigenpair(frame, S, sp)
        points.append(point_record(sp, ep.v, ep.lam, classify(sp)))
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "kind": "census",
        "n": n,
        "m": m,
        "seed": seed,
        "count": len(points),
        "expected_count": cen.expected_count,
        "upper_bound": cen.upper_bound,
        "matches": {
            "expected_count": cen.count_matches,
            "within_upper_bound": cen.within_bound,
            "upper_bound_attained": cen.bound_attained,
            "isolated": cen.isolated,
        },
        "continuum_partitions": [list(p) for p in cen.continuum_partitions],
        "points": points,
    }


def basin_report(result, cen: Census) -> dict:
    """Wrap a :class:`~simplex_spectra.power.BasinReport` with census context."""
    body = result.as_dict()
    hits = result.point_hits
    body["census_points"] = [
        {"index": j, "u": _floats(p.u), "objective": float(p.objective),
         "hits": hits.get(j, 0)}
        for j, p in enumerate(cen.points)
    ] if result.runs else []
    return {"schema_version": SCHEMA_VERSION, "tool_version": __version__,
            "kind": "basin", **body}


def verify_report(checks: list, seed: int, starts: int, skipped=()) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "kind": "verify",
        "seed": seed,
        "starts": starts,
        "passed": all(c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
        "multistart_skipped": [list(g) for g in skipped],
    }


###############################################################################
# Serialization


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _join(xs) -> str:
    return ";".join(repr(float(x)) for x in xs)


def census_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "kind", "k", "p", "q", "s", "alpha", "beta", "lambda",
                "kkt_residual", "verdict", "theory_path", "degenerate", "u", "v"])
    for i, p in enumerate(report["points"]):
        st = p["structure"] or {}
        cl = p["classification"]
        w.writerow([i, st.get("kind", ""), st.get("k", ""), st.get("p", ""),
                    st.get("q", ""), st.get("s", ""), repr(p["alpha"]), repr(p["beta"]),
                    repr(p["lambda"]), repr(p["kkt_residual"]), cl["verdict"],
                    cl["theory_path"], cl["degenerate"], _join(p["u"]), _join(p["v"])])
    return buf.getvalue()


def basin_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "objective", "hits", "u"])
    for p in report["census_points"]:
        w.writerow([p["index"], repr(p["objective"]), p["hits"], _join(p["u"])])
    return buf.getvalue()


def verify_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject", "grid", "max_discrepancy", "tolerance", "verdict"])
    for c in report["checks"]:
        grid = " ".join(f"{n}x{m}" for n, m in c["grid"])
        w.writerow([c["subject"], grid, repr(c["max_discrepancy"]), repr(c["tolerance"]),
                    c["verdict"]])
    return buf.getvalue()


def serialize(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    writer = {"census": census_csv, "basin": basin_csv, "verify": verify_csv}[report["kind"]]
    return writer(report)
