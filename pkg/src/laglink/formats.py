"""JSON, CSV and SVG encodings of the package's values.

JSON output is deterministic: dict insertion order is kept, floats are
rounded to 12 significant digits, and non-finite floats become the strings
"inf", "-inf", "nan". Exact areas are ``{"rational": [p, q, "pi"]}`` (a
rational multiple of pi) or ``{"rational": [p, q]}``.
"""
from __future__ import annotations

import io
import json
import math
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import SchemaError
from .geom_core import LagrangianSurface, SampledCurve2, SampledLoop4
from .invariant_lattice import H1LatticeData, PiMultiple, TorusDescriptor, Verdict, as_area
from .linking import LinkingCertificate
from .movie_builder import ClosedUpTorus, Movie
from .sft_auditor import AuditReport, BuildingSpec, ComponentSpec, CoverData, MatchEntry, Puncture

SIG_DIGITS = 12


def _round(x: float) -> float | str:
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(f"{x:.{SIG_DIGITS}g}")


def normalize(obj: Any) -> Any:
    """Plain JSON-ready structure with rounded floats."""
    if isinstance(obj, Mapping):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (PiMultiple, Fraction)):
        return area_to_json(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(normalize(obj), indent=1, ensure_ascii=False) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from None


def _need(d: Mapping[str, Any], key: str, what: str) -> Any:
    try:
        return d[key]
    except (KeyError, TypeError):
        raise SchemaError(f"{what}: missing field {key!r}") from None


# ---------------------------------------------------------------------------
# areas and lattices


def area_to_json(a: Any) -> Any:
    if isinstance(a, PiMultiple):
        return {"rational": [a.coef.numerator, a.coef.denominator, "pi"]}
    if isinstance(a, Fraction):
        return {"rational": [a.numerator, a.denominator]}
    return _round(float(a))


def area_from_json(v: Any) -> Any:
    if isinstance(v, Mapping):
        r = _need(v, "rational", "area")
        if not (isinstance(r, list) and len(r) in (2, 3) and all(isinstance(k, int) for k in r[:2]) and r[1] != 0):
            raise SchemaError(f"bad rational area {r!r}")
        q = Fraction(r[0], r[1])
        if len(r) == 3:
            if r[2] != "pi":
                raise SchemaError(f"unknown area unit {r[2]!r}")
            return PiMultiple(q)
        return q
    if isinstance(v, bool):
        raise SchemaError(f"bad area {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        try:
            return as_area(v)
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"bad area {v!r}") from None
    raise SchemaError(f"bad area {v!r}")


def descriptor_to_json(d: TorusDescriptor) -> dict[str, Any]:
    out: dict[str, Any] = {
        "mu": list(d.lattice.mu),
        "omega": [area_to_json(w) for w in d.lattice.omega],
        "kind": d.kind,
    }
    if d.enumerative is not None:
        out["enumerative"] = {f"{k[0]},{k[1]}": v for k, v in sorted(d.enumerative.items())}
    if d.pi1_image_generator is not None:
        out["pi1_image"] = d.pi1_image_generator
    if d.admissible is not None:
        out["admissible"] = d.admissible
    if d.label:
        out["label"] = d.label
    return out


def descriptor_from_json(doc: Mapping[str, Any]) -> TorusDescriptor:
    mu = _need(doc, "mu", "torus descriptor")
    om = _need(doc, "omega", "torus descriptor")
    if not (isinstance(mu, list) and len(mu) == 2 and all(isinstance(m, int) for m in mu)):
        raise SchemaError("mu must be a list of two integers")
    if not (isinstance(om, list) and len(om) == 2):
        raise SchemaError("omega must be a list of two areas")
    enum = doc.get("enumerative")
    if enum is not None:
        try:
            enum = {tuple(int(x) for x in k.split(",")): int(v) for k, v in enum.items()}
        except (AttributeError, ValueError):
            raise SchemaError("enumerative keys must look like \"1,0\"") from None
    try:
        lat = H1LatticeData(tuple(mu), tuple(area_from_json(w) for w in om), doc.get("provenance", "json"))
        return TorusDescriptor(
            lat,
            doc.get("kind", "custom"),
            enum,
            doc.get("pi1_image"),
            doc.get("admissible"),
            doc.get("admissible_reason", ""),
            doc.get("label", ""),
        )
    except (ValueError, TypeError) as e:
        raise SchemaError(str(e)) from None


def verdict_to_json(v: Verdict) -> dict[str, Any]:
    return v.as_dict()


# ---------------------------------------------------------------------------
# curves and loops


def loop_to_csv(loop: SampledLoop4 | SampledCurve2 | np.ndarray) -> str:
    pts = np.asarray(getattr(loop, "samples", loop), dtype=float)
    header = "x1,y1,x2,y2" if pts.shape[1] == 4 else "x,y"
    buf = io.StringIO()
    np.savetxt(buf, pts, delimiter=",", fmt=f"%.{SIG_DIGITS}g", header=header, comments="")
    return buf.getvalue()


def _csv_array(text: str) -> tuple[list[str], np.ndarray]:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise SchemaError("empty CSV")
    header = [h.strip() for h in lines[0].split(",")]
    try:
        arr = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]], dtype=float)
    except ValueError as e:
        raise SchemaError(f"bad CSV value: {e}") from None
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise SchemaError("CSV rows must match the header width")
    return header, arr


def loop_from_csv(text: str) -> SampledLoop4:
    header, arr = _csv_array(text)
    if header != ["x1", "y1", "x2", "y2"]:
        raise SchemaError(f"loop CSV needs columns x1,y1,x2,y2, got {header}")
    try:
        return SampledLoop4(arr)
    except ValueError as e:
        raise SchemaError(str(e)) from None


def curve_from_csv(text: str, closed: bool = True) -> SampledCurve2:
    header, arr = _csv_array(text)
    if header != ["x", "y"]:
        raise SchemaError(f"curve CSV needs columns x,y, got {header}")
    try:
        return SampledCurve2(arr, closed=closed)
    except ValueError as e:
        raise SchemaError(str(e)) from None


# ---------------------------------------------------------------------------
# surfaces, movies, closed-up tori


def surface_to_json(s: LagrangianSurface) -> dict[str, Any]:
    return {
        "kind": s.kind,
        "N_s": s.n_s,
        "N_t": s.n_t,
        "t_values": s.t_values,
        "t_period": s.t_period,
        "lagrangian_defect": s.lagrangian_defect,
        "embedded_certificate": s.embedded_certificate,
        "grid": s.grid,
    }


def surface_from_json(doc: Mapping[str, Any]) -> LagrangianSurface:
    try:
        g = np.array(_need(doc, "grid", "surface"), dtype=float)
        if g.shape[:2] != (doc["N_s"], doc["N_t"]):
            raise SchemaError("grid shape disagrees with N_s, N_t")
        return LagrangianSurface(
            g,
            _need(doc, "kind", "surface"),
            np.array(doc.get("t_values", np.arange(g.shape[1])), dtype=float),
            doc.get("t_period"),
            float(doc.get("lagrangian_defect", "nan")),
            bool(doc.get("embedded_certificate", False)),
        )
    except (ValueError, TypeError, KeyError) as e:
        raise SchemaError(f"surface: {e}") from None


def movie_to_json(m: Movie) -> dict[str, Any]:
    return {"t_grid": m.t_grid, "frames": m.frames, "z0": m.z0}


def movie_from_json(doc: Mapping[str, Any]) -> Movie:
    try:
        return Movie(
            np.array(_need(doc, "t_grid", "movie"), dtype=float),
            np.array(_need(doc, "frames", "movie"), dtype=float),
            np.array(_need(doc, "z0", "movie"), dtype=float),
        )
    except (ValueError, TypeError) as e:
        raise SchemaError(f"movie: {e}") from None


def closed_up_to_json(t: ClosedUpTorus) -> dict[str, Any]:
    return {
        "geometry": t.geometry,
        "area_sigma": t.area_sigma,
        "area_tau": t.area_tau,
        "maslov_sigma": t.maslov_sigma,
        "maslov_tau": t.maslov_tau,
        "disk_family_heights": list(t.disk_family_heights),
        "sigma_csv": loop_to_csv(t.sigma),
        "tau_csv": loop_to_csv(t.tau),
        "surface": surface_to_json(t.surface),
    }


def certificate_to_json(c: LinkingCertificate, witness_ref: str | None = None) -> dict[str, Any]:
    return {
        "linked": c.linked,
        "classes": list(c.classes),
        "witness_index": c.witness_index,
        "witness_loop": witness_ref,
        "class": c.witness_class,
        "crossings": [{"t": r.t, "sign": r.sign, "point": list(r.location.as_array())} for r in c.crossings],
    }


# ---------------------------------------------------------------------------
# buildings


def building_from_json(doc: Mapping[str, Any]) -> BuildingSpec:
    comps = _need(doc, "components", "building")
    if not isinstance(comps, list):
        raise SchemaError("components must be a list")
    out: list[ComponentSpec] = []
    for c in comps:
        cover = c.get("cover")
        try:
            cv = CoverData(int(cover["d"]), int(cover["b"]), int(cover["k_v"]), int(cover["c1_v"])) if cover else None
            pts = tuple(Puncture(str(p["orbit"]), str(p["pol"])) for p in _need(c, "punctures", "component"))
            c1 = c.get("c1", 0)
            if not isinstance(c1, int) or isinstance(c1, bool):
                raise SchemaError(f"component {c.get('id')}: c1 must be an integer")
            out.append(
                ComponentSpec(
                    str(_need(c, "id", "component")),
                    str(_need(c, "domain", "component")),
                    pts,
                    c1,
                    bool(c.get("plane", False)),
                    cv,
                    int(c.get("genus", 0)),
                )
            )
        except (KeyError, TypeError) as e:
            raise SchemaError(f"component {c.get('id') if isinstance(c, Mapping) else c!r}: {e}") from None
    matching = doc.get("matching")
    if matching is not None:
        try:
            matching = {str(o): MatchEntry(str(m["neg"]), None if m.get("pos") is None else str(m["pos"])) for o, m in matching.items()}
        except (KeyError, TypeError, AttributeError) as e:
            raise SchemaError(f"matching: {e}") from None
    omega = doc.get("omega")
    return BuildingSpec(
        tuple(out),
        bool(doc.get("limit_of_planes", False)),
        str(doc.get("profile", "two_torus")),
        None if omega is None else float(omega),
        bool(doc.get("forbid_lower_planes", False)),
        matching,
    )


def building_to_json(b: BuildingSpec) -> dict[str, Any]:
    comps = []
    for c in b.components:
        d: dict[str, Any] = {
            "id": c.id,
            "domain": c.domain,
            "punctures": [{"orbit": p.orbit, "pol": "+" if p.positive else "-"} for p in c.punctures],
            "c1": c.c1,
            "plane": c.plane,
        }
        if c.cover is not None:
            d["cover"] = {"d": c.cover.d, "b": c.cover.b, "k_v": c.cover.k_v, "c1_v": c.cover.c1_v}
        comps.append(d)
    out: dict[str, Any] = {
        "components": comps,
        "matching": {o: {"neg": m.neg, "pos": m.pos} for o, m in b.matching.items()},
        "limit_of_planes": b.limit_of_planes,
        "profile": b.profile,
    }
    if b.omega_u is not None:
        out["omega"] = b.omega_u
    return out


def report_to_json(r: AuditReport) -> dict[str, Any]:
    out: dict[str, Any] = {
        "ok": r.ok,
        "indices": r.indices,
        "total_index": r.total_index,
        "closed_form_total": r.closed_form_total,
        "top_level_sum": r.top_level_sum,
        "lower_level_sum": r.lower_level_sum,
        "N": r.N,
        "K": r.K,
        "rho": r.rho,
        "violations": [v.as_dict() for v in r.violations],
        "notes": list(r.notes),
    }
    if r.energy is not None:
        out["energy_budget"] = {
            "E_alpha_max": r.energy.E_alpha_max,
            "E_omega_max": r.energy.E_omega_max,
            "total_max": r.energy.total_max,
        }
    return out


# ---------------------------------------------------------------------------
# SVG


SVG_SIZE = 512
SVG_PAD = 0.05


def svg_projection(paths: Sequence[np.ndarray], plane: int, closed: bool = True) -> str:
    """Polylines of the (x1, y1) (plane=1) or (x2, y2) (plane=2) projection."""
    k = 2 * (plane - 1)
    xy = [np.asarray(p, dtype=float)[:, k : k + 2] for p in paths]
    allp = np.vstack(xy)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    scale = SVG_SIZE * (1 - 2 * SVG_PAD) / span
    centre = 0.5 * (lo + hi)
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">']
    for p in xy:
        u = SVG_SIZE / 2 + (p[:, 0] - centre[0]) * scale
        v = SVG_SIZE / 2 - (p[:, 1] - centre[1]) * scale
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(u, v))
        tag = "polygon" if closed else "polyline"
        lines.append(f'<{tag} points="{pts}" fill="none" stroke="black" stroke-width="1"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def surface_plot_paths(s: LagrangianSurface, n_lines: int = 16) -> list[np.ndarray]:
    """A few s-loops of the surface, evenly spaced in t."""
    cols = np.linspace(0, s.n_t - 1, min(n_lines, s.n_t)).round().astype(int)
    return [s.grid[:, j, :] for j in cols]
