"""JSON descriptors for schemes and windows; CSV writers for points and spectra.

CSV files use '.' decimals, '\\n' line endings and 12 significant digits, and
start with a '#'-prefixed JSON header line describing the run.
"""
from __future__ import annotations

import io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exact import Golden, PAdicApprox, format_golden
from .scheme import BUILTIN_SCHEMES, CutProjectScheme, InternalSpace, builtin_scheme, make_custom_scheme
from .window import Window, window_from_json

FLOAT_FMT = "%.12g"


def fmt(x) -> str:
    return FLOAT_FMT % x


def _encode(x):
    if isinstance(x, Golden):
        return format_golden(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return [_encode(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _encode(v) for k, v in x.items()}
    return x


def dumps(obj) -> str:
    return json.dumps(_encode(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(obj, path) -> None:
    write_text(path, dumps(obj))


def scheme_to_json(scheme: CutProjectScheme) -> dict:
    if scheme.name in BUILTIN_SCHEMES:
        out = {"kind": scheme.name, "d": scheme.d, "internal": scheme.internal.to_json()}
        if scheme.name in ("icosian", "h3", "h2"):
            out["generators"] = [[format_golden(c) for c in g.components]
                                 for g in scheme.meta["generators"]]
        return out
    rows = [list(p) + list(q) for p, q in zip(scheme.exact_phys, scheme.exact_int)] \
        if scheme.exact_phys is not None and scheme.exact_int is not None else \
        np.hstack([scheme.phys_basis, scheme.int_basis]).tolist()
    return {"kind": "custom", "d": scheme.d, "internal": scheme.internal.to_json(), "basis": rows}


def scheme_from_json(obj: dict) -> CutProjectScheme:
    kind = obj.get("kind")
    if kind in BUILTIN_SCHEMES:
        return builtin_scheme(kind)
    if kind != "custom":
        raise ValueError(f"unknown scheme kind {kind!r}")
    it = obj["internal"]
    internal = InternalSpace(it["kind"], int(it["dim"]), it.get("p"))
    return make_custom_scheme(int(obj["d"]), internal, obj["basis"])


def _load_descriptor(text_or_path):
    s = str(text_or_path).strip()
    if s.startswith("{"):
        return json.loads(s)
    return json.loads(Path(s).read_text())


def load_scheme(arg: str) -> CutProjectScheme:
    if arg in BUILTIN_SCHEMES:
        return builtin_scheme(arg)
    return scheme_from_json(_load_descriptor(arg))


def load_window(arg: str) -> Window:
    return window_from_json(_load_descriptor(arg))


def _internal_cells(ps, depth: int = 16) -> list[list[str]]:
    if ps.scheme is not None and ps.scheme.internal.is_padic:
        p = ps.scheme.internal.p
        return [[PAdicApprox.from_int(int(x), p, depth).digit_string() for x in row] for row in ps.internal]
    return [[fmt(x) for x in row] for row in np.asarray(ps.internal, dtype=float)]


def points_csv(ps, header: dict | None = None) -> str:
    buf = io.StringIO(newline="")
    rank = ps.coords.shape[1] if ps.coords.ndim == 2 else 0
    m = ps.internal.shape[1] if ps.internal.ndim == 2 else 0
    head = {"region": ps.region.to_json(), "n_points": len(ps)}
    if ps.window is not None and hasattr(ps.window, "to_json"):
        head["window"] = ps.window.to_json()
    if ps.scheme is not None:
        head["scheme"] = ps.scheme.name
    head.update(header or {})
    buf.write("# " + json.dumps(_encode(head), sort_keys=True) + "\n")
    cols = [f"n{i}" for i in range(rank)] + [f"x{i}" for i in range(ps.d)] + \
           [f"u{i}" for i in range(m)] + ["weight_re", "weight_im", "flags"]
    buf.write(",".join(cols) + "\n")
    internal = _internal_cells(ps)
    w = np.ones(len(ps), dtype=complex) if ps.weights is None else np.asarray(ps.weights, dtype=complex)
    for i in range(len(ps)):
        row = [str(int(c)) for c in ps.coords[i]] + [fmt(x) for x in ps.physical[i]] + internal[i]
        row += [fmt(w[i].real), fmt(w[i].imag), "boundary" if ps.boundary[i] else ""]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def spectrum_csv(spec, background_k=None, background_I=None, header: dict | None = None) -> str:
    buf = io.StringIO(newline="")
    d = spec.k.shape[1]
    head = {"density": spec.density, "background": spec.background, "n_peaks": len(spec),
            "normalization": "per unit volume; peak weight density^2 * w(k)"}
    head.update(header or {})
    buf.write("# " + json.dumps(_encode(head), sort_keys=True) + "\n")
    buf.write(",".join([f"k{i}" for i in range(d)] + ["intensity", "tag"]) + "\n")
    for k, I in zip(spec.k, spec.intensity):
        buf.write(",".join([fmt(x) for x in k] + [fmt(I), "peak"]) + "\n")
    if background_k is not None:
        for k, I in zip(np.atleast_2d(np.asarray(background_k).reshape(len(background_I), -1)), background_I):
            buf.write(",".join([fmt(x) for x in k] + [fmt(I), "background"]) + "\n")
    return buf.getvalue()


def write_text(path, text: str) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
