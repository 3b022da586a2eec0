"""JSON interchange: matrices as nested [re, im] pairs, floats at 12 significant digits."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compat import CompatReport, Ensemble, SuperEnsemble, joint_measurability
from .config import DEFAULT_TOL, Tolerances
from .povm import JointPovm, Povm, PovmTuple, reduce

SIG_DIGITS = 12


def fmt(x: float) -> float:
    """Round to 12 significant digits (the JSON float precision)."""
    x = float(x)
    if not np.isfinite(x):
        return x
    return float(f"{x:.{SIG_DIGITS}g}") + 0.0


def matrix_to_json(m) -> list:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return [[[fmt(z.real), fmt(z.imag)] for z in row] for row in m]


def matrix_from_json(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix JSON must be a nested array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def povm_to_json(p: Povm) -> dict:
    return {"dim": p.dim, "effects": [matrix_to_json(a) for a in p]}


def povm_from_json(obj) -> Povm:
    p = Povm(np.array([matrix_from_json(a) for a in obj["effects"]]))
    if "dim" in obj and int(obj["dim"]) != p.dim:
        raise ValueError(f"declared dim {obj['dim']} != effect size {p.dim}")
    return p


def tuple_to_json(t: PovmTuple) -> dict:
    return {"dim": t.dim, "povms": [povm_to_json(p) for p in t]}


def tuple_from_json(obj) -> PovmTuple:
    if "povms" not in obj:
        if "effects" in obj:
            return PovmTuple((povm_from_json(obj),))
        raise ValueError("tuple JSON needs a 'povms' list")
    t = PovmTuple(tuple(povm_from_json(p) for p in obj["povms"]))
    if "dim" in obj and int(obj["dim"]) != t.dim:
        raise ValueError(f"declared dim {obj['dim']} != POVM dim {t.dim}")
    return t


def tuple_hash(t: PovmTuple) -> str:
    """sha256 of the canonical JSON form, so a saved and re-loaded tuple hashes identically."""
    text = json.dumps(tuple_to_json(t), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def isometry_to_json(v) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"dim": v.shape[0], "r": v.shape[1], "matrix": matrix_to_json(v)}


def isometry_from_json(obj) -> np.ndarray:
    m = matrix_from_json(obj["matrix"] if isinstance(obj, dict) else obj)
    return m


def superensemble_to_json(s: SuperEnsemble) -> dict:
    return {"dim": s.dim, "q": [fmt(x) for x in s.probs],
            "ensembles": [{"p": [fmt(x) for x in e.probs], "states": [matrix_to_json(a) for a in e.states]}
                          for e in s.ensembles]}


def superensemble_from_json(obj) -> SuperEnsemble:
    ens = tuple(Ensemble(np.array([matrix_from_json(a) for a in e["states"]]), e["p"]) for e in obj["ensembles"])
    s = SuperEnsemble(ens, obj["q"])
    if "dim" in obj and int(obj["dim"]) != s.dim:
        raise ValueError(f"declared dim {obj['dim']} != state dim {s.dim}")
    return s


def joint_to_json(j: JointPovm) -> dict:
    shape = list(j.outcome_shape)
    flat = j.effects.reshape((-1, j.dim, j.dim))
    return {"dim": j.dim, "outcomes": shape, "effects": [matrix_to_json(a) for a in flat]}


def joint_from_json(obj) -> JointPovm:
    flat = np.array([matrix_from_json(a) for a in obj["effects"]])
    return JointPovm(flat.reshape(tuple(obj["outcomes"]) + flat.shape[1:]))


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return fmt(x) if np.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    return x if x is None or isinstance(x, str) else str(x)


def report_to_json(rep: CompatReport, t: PovmTuple | None = None) -> dict:
    out = {"verdict": rep.verdict, "robustness": _plain(rep.robustness), "margin": _plain(rep.margin),
           "joint": joint_to_json(rep.joint) if rep.joint is not None else None,
           "diagnostics": _plain(rep.diagnostics)}
    if t is not None:
        out["tuple_hash"] = tuple_hash(t)
    return out


def report_from_json(obj) -> CompatReport:
    joint = joint_from_json(obj["joint"]) if obj.get("joint") else None
    rob = obj.get("robustness")
    margin = obj.get("margin")
    return CompatReport(obj["verdict"], float("nan") if rob is None else rob,
                        float("nan") if margin is None else margin, joint, obj.get("diagnostics") or {})


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

R_AT_LEAST = "R_at_least"          # reduce(T, V) compatible, so R(T) >= r
RBAR_BELOW = "Rbar_below"          # reduce(T, V) incompatible, so R-bar(T) < r


class CertificateMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Certificate:
    kind: str
    r: int
    isometry: np.ndarray
    tuple_hash: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "r": self.r, "tuple_hash": self.tuple_hash,
                "isometry": isometry_to_json(self.isometry)}

    def check(self, t: PovmTuple, tol: Tolerances = DEFAULT_TOL) -> bool:
        """Re-verify against ``t`` (which must hash to the certified tuple)."""
        if tuple_hash(t) != self.tuple_hash:
            raise CertificateMismatch("certificate was issued for a different tuple")
        rep = joint_measurability(reduce(t, self.isometry, DEFAULT_TOL.with_(iso=1e-9)), tol)
        return rep.verdict == ("compatible" if self.kind == R_AT_LEAST else "incompatible")


def make_certificate(kind: str, t: PovmTuple, v) -> Certificate:
    if kind not in (R_AT_LEAST, RBAR_BELOW):
        raise ValueError(f"unknown certificate kind {kind!r}")
    v = np.asarray(v, dtype=complex)
    return Certificate(kind, v.shape[1], v, tuple_hash(t))


def certificate_from_json(obj, t: PovmTuple | None = None) -> Certificate:
    cert = Certificate(obj["kind"], int(obj["r"]), isometry_from_json(obj["isometry"]), obj["tuple_hash"])
    if t is not None and tuple_hash(t) != cert.tuple_hash:
        raise CertificateMismatch("certificate hash does not match the supplied tuple")
    return cert


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_json(obj, path=None) -> str:
    text = json.dumps(_plain(obj), indent=1)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
