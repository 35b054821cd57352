"""Family files, report documents, the worked example and SVG output."""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .certificate import AS_DERIVED, AS_PRINTED, Certificate, SubsystemFamily, certify, k1_as_printed
from .errors import DwellCertError
from .linalg_core import mat_pow, norm2

EXAMPLE_A1 = [[0.02, 0.93], [-0.53, -0.92]]
EXAMPLE_A2 = [[0.04, 0.09], [0.08, -0.11]]
PERTURBED_A1 = [[0.05, 0.95], [-0.6, -0.92]]
PERTURBED_A2 = [[0.04, 0.09], [0.1, -0.11]]


def example_family() -> SubsystemFamily:
    return SubsystemFamily([EXAMPLE_A1, EXAMPLE_A2], labels=["A1", "A2"])


def perturbed_example_family() -> SubsystemFamily:
    return SubsystemFamily([PERTURBED_A1, PERTURBED_A2], labels=["A1~", "A2~"])


# --- family files -----------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def family_to_json(fam: SubsystemFamily) -> str:
    mats = []
    for a in fam.matrices:
        rows = ", ".join("[" + ", ".join(_fmt(v) for v in row) + "]" for row in a)
        mats.append("    [" + rows + "]")
    parts = ['{', f'  "d": {fam.d},', '  "matrices": [', ",\n".join(mats), '  ]']
    if fam.labels is not None:
        parts[-1] += ","
        parts.append('  "labels": ' + json.dumps(list(fam.labels)))
    parts.append("}")
    return "\n".join(parts) + "\n"


def family_from_dict(doc) -> SubsystemFamily:
    if not isinstance(doc, dict):
        raise DwellCertError("bad-family", "top level must be a JSON object")
    if "matrices" not in doc:
        raise DwellCertError("bad-family", "missing field 'matrices'")
    mats = doc["matrices"]
    if not isinstance(mats, list) or len(mats) < 2:
        raise DwellCertError("bad-family", "field 'matrices' must list at least two matrices")
    d = doc.get("d", None)
    if d is None:
        d = len(mats[0]) if isinstance(mats[0], list) else 0
    if not isinstance(d, int) or d < 1:
        raise DwellCertError("bad-family", f"field 'd' must be a positive integer, got {d!r}")
    out = []
    for k, a in enumerate(mats):
        where = f"matrices[{k}]"
        if not isinstance(a, list) or len(a) != d:
            raise DwellCertError("bad-family", f"{where}: expected {d} rows")
        for r, row in enumerate(a):
            if not isinstance(row, list) or len(row) != d:
                raise DwellCertError("bad-family", f"{where}[{r}]: expected {d} entries (ragged row)")
            for c, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise DwellCertError("bad-family", f"{where}[{r}][{c}]: not a finite number: {v!r}")
        out.append(np.array(a, dtype=float))
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != len(out)
                               or not all(isinstance(s, str) for s in labels)):
        raise DwellCertError("bad-family", "field 'labels' must be one string per matrix")
    return SubsystemFamily(out, labels)


def load_family(path) -> SubsystemFamily:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DwellCertError("io", f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DwellCertError("bad-family", f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return family_from_dict(doc)


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dwellcert-")
    except OSError as exc:
        raise DwellCertError("io", f"cannot write to {directory}: {exc.strerror}") from exc
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_family(fam: SubsystemFamily, path) -> None:
    atomic_write_text(path, family_to_json(fam))


# --- report document -----------------------------------------------------------

TAGS = {
    "m": "smallest m >= delta with max_i ||A_i^m|| < 1",
    "rho": "max_i ||A_i^m||",
    "lambda": "decay rate, rho e^(lambda m) < 1",
    "rho_e_lambda_m": "rho e^(lambda m)",
    "M": "max_i ||A_i||",
    "K1": "floor(m/delta)",
    "K2": "floor((N-1)(m-1)/delta)",
    "K3": "(N-1)(m-1) - K2 delta",
    "eps": "max_{i != j} ||A_i^p A_j^q - A_j^q A_i^p||",
    "theorem_lhs": "left-hand side of the dwell-time commutator condition (<= 1 certifies)",
    "corollary_lhs": "left-hand side of the arbitrary-switching condition",
    "c": "max over segments of length <= N(m-1)+1 of ||W|| e^(lambda |W|), floored at 1",
}


def _tagged(key: str, value, tag_key: Optional[str] = None) -> dict:
    return {"value": value, "instantiates": TAGS[tag_key or key]}


def build_report(fam: SubsystemFamily, cert: Certificate, inputs: dict) -> dict:
    """ReportDocument: inputs echo, certificate scalars, both corollary
    exponents and both K1 readings, with the active choices flagged."""
    eps = None
    if cert.eps is not None:
        d = cert.delta
        eps = {
            f"eps_{p}_{q}": _tagged("eps", cert.eps[(p, q)] if (p, q) in cert.eps.values else cert.eps.ones)
            for p, q in ((d, d), (d, 1), (1, d), (1, 1))
        }
    active = cert.provenance.get("corollary_exponent_mode", AS_PRINTED)
    cert_doc = {
        "delta": cert.delta,
        "verdict": cert.verdict,
        "reason": cert.reason,
        "m": _tagged("m", cert.m),
        "rho": _tagged("rho", cert.rho),
        "lambda": _tagged("lambda", cert.lam),
        "rho_e_lambda_m": _tagged("rho_e_lambda_m", cert.rho_e_lam_m),
        "M": _tagged("M", cert.M),
        "K1": _tagged("K1", cert.K1),
        "K2": _tagged("K2", cert.K2),
        "K3": _tagged("K3", cert.K3),
        "eps": eps,
        "theorem_lhs": _tagged("theorem_lhs", cert.theorem_lhs),
        "c": _tagged("c", cert.c),
    }
    corollary = {
        AS_PRINTED: {"exponent": "N(m-1)+1", "value": cert.corollary_lhs_printed, "active": active == AS_PRINTED},
        AS_DERIVED: {"exponent": "N(m-1)-1", "value": cert.corollary_lhs_derived, "active": active == AS_DERIVED},
        "instantiates": TAGS["corollary_lhs"],
    }
    k1_readings = {
        "floor(m/delta)": {"value": cert.K1, "active": True},
        "floor(delta/m)": {"value": k1_as_printed(cert.m, cert.delta) if cert.m else None, "active": False},
    }
    return {
        "inputs": inputs,
        "family": {"N": fam.N, "d": fam.d, "labels": list(fam.labels) if fam.labels else None},
        "certificate": cert_doc,
        "corollary": corollary,
        "k1_readings": k1_readings,
        "provenance": dict(cert.provenance),
    }


def _num(v, fmt=".6g") -> str:
    return "n/a" if v is None else format(v, fmt)


def format_report(doc: dict) -> str:
    cert = doc["certificate"]
    lines = [
        f"verdict            : {cert['verdict']}  ({cert['reason']})",
        f"delta              : {cert['delta']}",
        f"m                  : {_num(cert['m']['value'], 'd') if cert['m']['value'] is not None else 'n/a'}",
        f"rho                : {_num(cert['rho']['value'])}",
        f"lambda             : {_num(cert['lambda']['value'])}  [{doc['provenance'].get('lambda_mode')}]",
        f"rho e^(lambda m)   : {_num(cert['rho_e_lambda_m']['value'])}",
        f"M                  : {_num(cert['M']['value'])}",
    ]
    for k in ("K1", "K2", "K3"):
        lines.append(f"{k:<19}: {cert[k]['value'] if cert[k]['value'] is not None else 'n/a'}")
    k1 = doc["k1_readings"]
    lines.append(f"K1 readings        : floor(m/delta)={k1['floor(m/delta)']['value']} (active), "
                 f"floor(delta/m)={k1['floor(delta/m)']['value']}")
    if cert["eps"]:
        for name, entry in cert["eps"].items():
            lines.append(f"{name:<19}: {_num(entry['value'])}")
    lines.append(f"theorem LHS        : {_num(cert['theorem_lhs']['value'])}")
    cor = doc["corollary"]
    for mode in (AS_PRINTED, AS_DERIVED):
        flag = " (active)" if cor[mode]["active"] else ""
        lines.append(f"corollary LHS {mode:<10}: {_num(cor[mode]['value'])}  exponent {cor[mode]['exponent']}{flag}")
    if cert["c"]["value"] is not None:
        lines.append(f"c                  : {_num(cert['c']['value'])}")
    return "\n".join(lines)


# --- worked example reproduction ---------------------------------------------------

@dataclass
class ComparisonRow:
    name: str
    computed: float
    reference: float
    tol: float
    kind: str  # "abs", "rel" or "exact"

    @property
    def passed(self) -> bool:
        if self.kind == "exact":
            return self.computed == self.reference
        if self.kind == "rel":
            return abs(self.computed - self.reference) <= self.tol * abs(self.reference)
        return abs(self.computed - self.reference) <= self.tol


REFERENCE_NOMINAL = {
    "lambda": 0.01, "delta": 2,
    "norm_A1^2": 1.1204, "norm_A1^3": 0.5404, "norm_A2^2": 0.0220, "norm_A2^3": 0.0033,
    "m": 3, "rho": 0.5404, "rho_e_lambda_m": 0.5569, "M": 1.3683,
    "K1": 1, "K2": 1, "K3": 0,
    "eps_dd": 0.0133, "eps_d1": 0.1897, "eps_1d": 0.1897, "eps_11": 0.2108,
    "theorem_lhs": 0.9664, "corollary_lhs": 6.9513,
}
REFERENCE_PERTURBED = {
    "lambda": 0.0001, "delta": 2,
    "norm_A1^2": 1.1384, "norm_A1^3": 0.5180, "norm_A2^2": 0.0243, "norm_A2^3": 0.0038,
    "m": 3, "rho": 0.5180, "rho_e_lambda_m": 0.5182, "M": 1.4043,
    "K1": 1, "K2": 1, "K3": 0,
    "eps_dd": 0.0157, "eps_d1": 0.2244, "eps_1d": 0.2244, "eps_11": 0.2579,
    "theorem_lhs": 0.9830,
}
ABS_TOL = 1e-3
LHS_RTOL = 2e-2


def compare_with_reference(fam: SubsystemFamily, reference: dict) -> list:
    """Computed vs printed values for one family of the worked example."""
    delta, lam = reference["delta"], reference["lambda"]
    cert = certify(fam, delta, lam=lam)
    if cert.m is None or cert.eps is None:
        raise DwellCertError("example-failed", cert.reason)
    computed = {
        "norm_A1^2": norm2(mat_pow(fam[1], 2)),
        "norm_A1^3": norm2(mat_pow(fam[1], 3)),
        "norm_A2^2": norm2(mat_pow(fam[2], 2)),
        "norm_A2^3": norm2(mat_pow(fam[2], 3)),
        "m": cert.m, "rho": cert.rho, "rho_e_lambda_m": cert.rho_e_lam_m, "M": cert.M,
        "K1": cert.K1, "K2": cert.K2, "K3": cert.K3,
        "eps_dd": cert.eps.dd, "eps_d1": cert.eps.d1, "eps_1d": cert.eps.one_d, "eps_11": cert.eps.ones,
        "theorem_lhs": cert.theorem_lhs,
    }
    if "corollary_lhs" in reference:
        c1 = certify(fam, 1, lam=lam)
        computed["corollary_lhs"] = c1.corollary_lhs_printed
    rows = []
    for key, ref in reference.items():
        if key in ("lambda", "delta"):
            continue
        if key in ("m", "K1", "K2", "K3"):
            rows.append(ComparisonRow(key, computed[key], ref, 0, "exact"))
        elif key in ("theorem_lhs", "corollary_lhs"):
            rows.append(ComparisonRow(key, computed[key], ref, LHS_RTOL, "rel"))
        else:
            rows.append(ComparisonRow(key, computed[key], ref, ABS_TOL, "abs"))
    return rows


def reproduce_example() -> dict:
    return {
        "nominal": compare_with_reference(example_family(), REFERENCE_NOMINAL),
        "perturbed": compare_with_reference(perturbed_example_family(), REFERENCE_PERTURBED),
    }


def format_comparison(tables: dict) -> str:
    lines = []
    for name, rows in tables.items():
        lines.append(f"[{name}]")
        lines.append(f"  {'quantity':<16}{'computed':>14}{'reference':>11}  {'tolerance':<12}result")
        for r in rows:
            tol = "exact" if r.kind == "exact" else f"{r.kind} {r.tol:g}"
            lines.append(f"  {r.name:<16}{r.computed:>14.6g}{r.reference:>11.6g}  {tol:<12}"
                         f"{'pass' if r.passed else 'FAIL'}")
    return "\n".join(lines)


def comparison_to_json(tables: dict) -> str:
    doc = {
        name: [
            {"quantity": r.name, "computed": r.computed, "reference": r.reference,
             "tolerance": r.tol, "kind": r.kind, "passed": r.passed}
            for r in rows
        ]
        for name, rows in tables.items()
    }
    return json.dumps(doc, indent=2)


# --- SVG ---------------------------------------------------------------------------

def norms_svg(mean: np.ndarray, peak: np.ndarray, width: int = 640, height: int = 360) -> str:
    """Line chart of mean and max ``||x(t)||`` against ``t``."""
    pad = 40
    T = len(mean) - 1
    top = float(max(np.max(peak), 1e-300))

    def pts(y):
        xs = pad + (width - 2 * pad) * np.arange(len(y)) / max(T, 1)
        ys = height - pad - (height - 2 * pad) * np.asarray(y) / top
        return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))

    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'  <rect width="{width}" height="{height}" fill="white"/>\n'
        f'  <line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
        f'  <line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
        f'  <text x="{width / 2}" y="{height - 8}" font-size="12" text-anchor="middle">t (0..{T})</text>\n'
        f'  <text x="{pad}" y="{pad - 10}" font-size="12">max ||x(t)|| = {top:.4g}</text>\n'
        f'  <polyline fill="none" stroke="crimson" points="{pts(peak)}"/>\n'
        f'  <polyline fill="none" stroke="steelblue" points="{pts(mean)}"/>\n'
        "</svg>\n"
    )
