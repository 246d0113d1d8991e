"""Signed intersections of loops with spanning solid tori.

A loop in the complement of a torus L has a class in pi_1 = H_1 = Z, read off
as its signed intersection number with a solid torus bounded by L. Two catalog
solid tori are supported:

* ``PlanarDiskCylinder(a, b, r)``: {(x1-a)^2 + (y1-b)^2 < r^2, x2 = 0}, the
  solid cylinder filling the round cylinder over the circle of radius r.
  A crossing is positive when x2 increases through 0.
* ``CliffordSpanning(r, which)``: for which=2, {|z1| < r, |z2| = r}, bounded by
  the torus |z1| = |z2| = r. A crossing is positive when |z2| - r increases
  through 0. which=2 is the generator used for pi_1 classes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import LoopTouchesTorus, NonTransversalCrossing, OutOfValidityBox
from .geom_core import Point4, SampledLoop4, diameter

BISECTION_TOL = 1e-10
BOUNDARY_MARGIN = 1e-8
SLOPE_REL = 1e-8


@dataclass(frozen=True)
class PlanarDiskCylinder:
    a: float
    b: float
    r: float

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError("radius must be positive")

    def crossing(self, p: np.ndarray) -> np.ndarray:
        return p[..., 2]

    def margin(self, p: np.ndarray) -> np.ndarray:
        """Positive strictly inside the disk, negative outside."""
        return self.r - np.hypot(p[..., 0] - self.a, p[..., 1] - self.b)


@dataclass(frozen=True)
class CliffordSpanning:
    r: float
    which: int = 2
    center: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError("radius must be positive")
        if self.which not in (1, 2):
            raise ValueError("which must be 1 or 2")

    def _moduli(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        q = p - np.asarray(self.center)
        return np.hypot(q[..., 0], q[..., 1]), np.hypot(q[..., 2], q[..., 3])

    def crossing(self, p: np.ndarray) -> np.ndarray:
        m1, m2 = self._moduli(p)
        return (m2 if self.which == 2 else m1) - self.r

    def margin(self, p: np.ndarray) -> np.ndarray:
        m1, m2 = self._moduli(p)
        return self.r - (m1 if self.which == 2 else m2)


SolidTorusModel = Union[PlanarDiskCylinder, CliffordSpanning]


@dataclass(frozen=True)
class CrossingRecord:
    t: float
    sign: int
    location: Point4


@dataclass(frozen=True)
class IntersectionResult:
    total: int
    crossings: tuple[CrossingRecord, ...]


def crossings_along_path(points: np.ndarray, S: SolidTorusModel, closed: bool = True) -> list[CrossingRecord]:
    """Transversal crossings of the piecewise-linear path through ``points``
    with the solid torus S. ``t`` is reported as (segment index + fraction) / N."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    f = S.crossing(p)
    nseg = n if closed else n - 1
    i = np.arange(nseg)
    j = (i + 1) % n
    cand = np.nonzero(((f[i] < 0) & (f[j] >= 0)) | ((f[i] >= 0) & (f[j] < 0)))[0]
    scale = max(diameter(p), 1e-300)
    out: list[CrossingRecord] = []
    for k in cand:
        a, b = p[k], p[(k + 1) % n]
        lo, hi = 0.0, 1.0
        flo = f[k]
        while hi - lo > BISECTION_TOL:
            mid = 0.5 * (lo + hi)
            fm = S.crossing(a + mid * (b - a))
            if (fm >= 0) == (flo >= 0):
                lo, flo = mid, fm
            else:
                hi = mid
        lam = 0.5 * (lo + hi)
        q = a + lam * (b - a)
        m = float(S.margin(q))
        if abs(m) <= BOUNDARY_MARGIN * S.r:
            raise NonTransversalCrossing(f"crossing at segment {k} lies on the boundary of the spanning disk")
        if m < 0:
            continue
        slope = (f[(k + 1) % n] - f[k]) * n
        if abs(slope) <= SLOPE_REL * scale:
            raise NonTransversalCrossing(f"crossing at segment {k} is tangential (slope {slope:.3g})")
        out.append(CrossingRecord((k + lam) / n, int(np.sign(slope)), Point4(*q)))
    return out


def intersection_number(loop: SampledLoop4, S: SolidTorusModel) -> IntersectionResult:
    rec = crossings_along_path(loop.samples, S, closed=True)
    return IntersectionResult(int(sum(c.sign for c in rec)), tuple(rec))


# ---------------------------------------------------------------------------
# tori with spanning models


@dataclass(frozen=True)
class CliffordTorus:
    """|z1 - c1| = |z2 - c2| = r, spanned by CliffordSpanning(r, 2, c)."""

    r: float
    center: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    @property
    def spanning(self) -> CliffordSpanning:
        return CliffordSpanning(self.r, 2, self.center)

    def distance(self, p: np.ndarray) -> np.ndarray:
        q = np.asarray(p, dtype=float) - np.asarray(self.center)
        return np.hypot(np.hypot(q[..., 0], q[..., 1]) - self.r, np.hypot(q[..., 2], q[..., 3]) - self.r)

    def meridian(self, N: int, phase: float = 0.0) -> SampledLoop4:
        th = 2 * np.pi * np.arange(N) / N
        c = np.asarray(self.center)
        return SampledLoop4(
            np.column_stack(
                [
                    c[0] + self.r * np.cos(th),
                    c[1] + self.r * np.sin(th),
                    np.full(N, c[2] + self.r * np.cos(phase)),
                    np.full(N, c[3] + self.r * np.sin(phase)),
                ]
            )
        )

    def longitude(self, N: int, phase: float = 0.0) -> SampledLoop4:
        th = 2 * np.pi * np.arange(N) / N
        c = np.asarray(self.center)
        return SampledLoop4(
            np.column_stack(
                [
                    np.full(N, c[0] + self.r * np.cos(phase)),
                    np.full(N, c[1] + self.r * np.sin(phase)),
                    c[2] + self.r * np.cos(th),
                    c[3] + self.r * np.sin(th),
                ]
            )
        )


def _surface_distance(torus: Any, pts: np.ndarray) -> tuple[float, float]:
    g = torus.surface.grid
    tree = cKDTree(g.reshape(-1, 4))
    d = float(tree.query(pts)[0].min())
    sp_s = np.linalg.norm(np.roll(g, -1, axis=0) - g, axis=-1).max()
    sp_t = np.linalg.norm(np.roll(g, -1, axis=1) - g, axis=-1).max()
    # a surface point lies within half a cell diagonal of some grid point
    return d, 0.5 * float(np.hypot(sp_s, sp_t))


def pi1_class(loop: SampledLoop4, torus: Any, tol: float | None = None) -> int:
    """Class of ``loop`` in pi_1 of the torus complement.

    ``torus`` is a radius (the Clifford torus of that radius at the origin), a
    :class:`CliffordTorus`, or a closed-up torus carrying ``surface``,
    ``spanning`` and ``validity``.
    """
    pts = loop.samples
    if isinstance(torus, (int, float)):
        torus = CliffordTorus(float(torus))
    if isinstance(torus, CliffordTorus):
        d = float(torus.distance(pts).min())
        limit = 1e-9 * torus.r if tol is None else tol
        if d <= limit:
            raise LoopTouchesTorus(f"loop comes within {d:.3g} of the torus")
        return intersection_number(loop, torus.spanning).total
    model = getattr(torus, "spanning", None)
    if model is None:
        raise ValueError("this torus carries no catalog spanning model")
    box = getattr(torus, "validity", None)
    if box is not None and float(np.max(np.abs(pts[:, 3]))) > box:
        raise OutOfValidityBox(f"loop leaves |y2| <= {box:.6g} where the spanning model is exact")
    d, spacing = _surface_distance(torus, pts)
    limit = spacing if tol is None else tol
    if d <= limit:
        raise LoopTouchesTorus(f"loop comes within {d:.3g} of the torus grid (resolution bound {spacing:.3g})")
    return intersection_number(loop, model).total


@dataclass(frozen=True, eq=False)
class LinkingCertificate:
    linked: bool
    classes: tuple[int, ...]
    witness_index: int | None
    witness_loop: SampledLoop4 | None
    witness_class: int
    crossings: tuple[CrossingRecord, ...] = field(default_factory=tuple)


def homological_linking_certificate(L1: Any, basis_loops: Sequence[SampledLoop4]) -> LinkingCertificate:
    """Linked iff some basis loop of L2 has nonzero class in the complement of L1."""
    classes = tuple(pi1_class(lp, L1) for lp in basis_loops)
    for k, c in enumerate(classes):
        if c != 0:
            lp = basis_loops[k]
            model = L1.spanning if not isinstance(L1, (int, float)) else CliffordTorus(float(L1)).spanning
            rec = intersection_number(lp, model).crossings
            return LinkingCertificate(True, classes, k, lp, c, rec)
    return LinkingCertificate(False, classes, None, None, 0)
