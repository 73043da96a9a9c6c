"""Verification reports: structured outcome of one check, JSON round trip and text rendering."""
from __future__ import annotations

import inspect
import json
import math
import time
from dataclasses import asdict, dataclass, field
from functools import wraps

import numpy as np

from .errors import VerificationError

STATUSES = ("pass", "violation", "error")


def plain(value):
    """Convert to JSON-ready Python values; complex numbers become ``[re, im]``."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [plain(float(value.real)), plain(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value) + 0.0  # drops the sign of -0.0
        return value if math.isfinite(value) else str(value)
    return value


def flat(*values) -> list:
    """Flatten scalars into a number list; complex values contribute re and im."""
    out = []
    for v in values:
        if isinstance(v, (complex, np.complexfloating)):
            out += [float(v.real) + 0.0, float(v.imag) + 0.0]
        else:
            out.append(float(v) + 0.0)
    return out


@dataclass
class VerificationReport:
    job: str
    kind: str
    status: str
    left: list
    right: list
    residual: float | None  # None only for error reports
    tolerance: float
    diagnostics: dict = field(default_factory=dict)
    runtime_ms: float = 0.0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        self.left = plain(list(self.left))
        self.right = plain(list(self.right))
        self.diagnostics = plain(dict(self.diagnostics))
        if self.residual is not None:
            self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)

    def to_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        if not timings:
            d["runtime_ms"] = 0
        return d

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def decide(residuals, tol: float) -> str:
    """pass iff every residual is within tolerance; violation if any finite residual exceeds it."""
    res = [float(r) for r in residuals]
    if not all(math.isfinite(r) for r in res):
        return "error"
    return "pass" if all(r <= tol for r in res) else "violation"


def make_report(kind, left, right, residuals, tol, diagnostics=None, inputs=None, job="") -> VerificationReport:
    residuals = [float(r) for r in residuals]
    diag = dict(diagnostics or {})
    if len(residuals) > 1:
        diag["residuals"] = residuals
    if inputs:
        diag["inputs"] = inputs
    status = decide(residuals, tol)
    residual = max(residuals) if status != "error" else None
    return VerificationReport(job, kind, status, left, right, residual, tol, diag)


def error_report(kind, exc: Exception, tol, inputs=None, job="") -> VerificationReport:
    diag = {"error": str(exc), "error_type": type(exc).__name__}
    location = getattr(exc, "location", None)
    if location:
        diag["location"] = location
    if inputs:
        diag["inputs"] = inputs
    return VerificationReport(job, kind, "error", [], [], None, tol, diag)


def checked(kind: str):
    """Turn library errors raised by a check into error reports and time the call."""

    def deco(fn):
        sig = inspect.signature(fn)

        @wraps(fn)
        def wrapper(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                rep = fn(*args, **kwargs)
            except VerificationError as exc:
                bound = sig.bind_partial(*args, **kwargs)
                bound.apply_defaults()
                rep = error_report(kind, exc, bound.arguments.get("tol", 1e-8))
            rep.runtime_ms = (time.perf_counter() - t0) * 1e3
            return rep

        return wrapper

    return deco


# --------------------------------------------------------------------------- text rendering

_LABEL = {"pass": "PASS", "violation": "VIOLATION", "error": "ERROR"}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, list) and all(isinstance(x, (int, float)) for x in v):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def explain(report: VerificationReport) -> str:
    """Human-readable rendering of a report."""
    d = report.diagnostics
    name = f"{report.job} ({report.kind})" if report.job else report.kind
    lines = [f"{_LABEL[report.status]}: {name}"]
    if report.left or report.right:
        lines.append(f"  left:  {_fmt(report.left)}")
        lines.append(f"  right: {_fmt(report.right)}")
    if report.residual is not None:
        rel = "<=" if report.residual <= report.tolerance else ">"
        lines.append(f"  residual {report.residual:.3e} {rel} tolerance {report.tolerance:.3e}")
    else:
        lines.append(f"  tolerance {report.tolerance:.3e}")
    if "error" in d:
        lines.append(f"  error: {d['error']}")
    loc = d.get("location") or {}
    if "t" in loc and "eps" in loc:
        lines.append(f"  offending sample: (t, eps) = ({loc['t']:.6g}, {loc['eps']:.6g})")
    elif loc:
        lines.append("  location: " + ", ".join(f"{k}={_fmt(v)}" for k, v in loc.items()))
    if d.get("winding") is not None:
        lines.append(f"  winding={d['winding']}")
    if "worst_square" in d:
        c = d["worst_square"]
        lines.append(f"  worst square center=({c[0]:.12g}, {c[1]:.12g})")
    if "depth" in d:
        lines.append(f"  depth={d['depth']}")
    for w in d.get("warnings", []):
        lines.append(f"  warning: {w}")
    skip = {"error", "error_type", "location", "winding", "worst_square", "depth", "warnings", "inputs"}
    for key in sorted(k for k in d if k not in skip):
        lines.append(f"  {key}: {_fmt(d[key])}")
    return "\n".join(lines)
