"""One test per acceptance criterion; each logs a PASS/FAIL line via ``record``."""
from __future__ import annotations

import json
import math
import random
import time
from decimal import Decimal, getcontext
from fractions import Fraction
from math import gcd

import numpy as np
import pytest

from _buildings import random_building
from laglink.cli import main
from laglink.geom_core import converged, maslov_index
from laglink.invariant_lattice import (
    H1LatticeData,
    PiMultiple,
    TorusDescriptor,
    a2,
    capacity_polydisk,
    chekanov_descriptor,
    clifford_descriptor,
    embedding_obstruction,
    monotonicity,
    product_torus_lattice,
    unlinking_verdict,
)
from laglink.linking import PlanarDiskCylinder, crossings_along_path, homological_linking_certificate
from laglink.movie_builder import flat_disk_family, lift, lift_closed, linked_cylinder_contract, linked_cylinder_movie, linked_pair
from laglink.sft_auditor import (
    ENERGY_COEFF,
    RULES,
    ComponentSpec,
    Puncture,
    audit_building,
    cz_index,
    energy_budget,
    fredholm_index,
    golden_building,
    golden_mutations,
    maslov_from_chern,
)

PI = PiMultiple(1)


@pytest.fixture(scope="module")
def pair256():
    return linked_pair(math.pi, math.pi / 4, resolution=(256, 256))


# ---------------------------------------------------------------------------
# 1


def test_linked_pair_construction(record, tmp_path, capsys):
    t0 = time.perf_counter()
    code = main(["--out", str(tmp_path), "--resolution", "256", "construct", "linked-pair", "--a2-1", "pi", "--a2-2", "pi/4"])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    val = json.loads((tmp_path / "validation.json").read_text())
    cert = json.loads((tmp_path / "certificate.json").read_text())

    fine = linked_pair(math.pi, math.pi / 4, resolution=(512, 512))
    coarse_defects = [val["tori"][k]["lagrangian_defect"] for k in ("L1", "L2")]
    fine_defects = [fine.L1.surface.lagrangian_defect, fine.L2.surface.lagrangian_defect]
    scale = max(val["tori"][k]["area_tau"] for k in ("L1", "L2"))
    halving = all(converged(c, f, scale) for c, f in zip(coarse_defects, fine_defects))

    a2_ok = all(abs(val["tori"][k]["a2"] - t) <= 1e-6 * t for k, t in (("L1", math.pi), ("L2", math.pi / 4)))
    defect_ok = max(coarse_defects) <= 1e-6
    linked_ok = cert["linked"] is True and abs(cert["class"]) == 1
    ok = code == 0 and a2_ok and defect_ok and halving and linked_ok and elapsed <= 30
    record(
        "1 linked pair",
        ok,
        f"a2 = ({val['tori']['L1']['a2']:.12g}, {val['tori']['L2']['a2']:.12g}), defects 256 {max(coarse_defects):.2g} "
        f"/ 512 {max(fine_defects):.2g}, witness class {cert['class']}, {elapsed:.1f} s",
    )
    assert ok


# ---------------------------------------------------------------------------
# 2


def test_linked_cylinder_contract(record, pair256):
    p = pair256.cylinder
    surf = lift(linked_cylinder_movie(p))
    c = linked_cylinder_contract(surf, p)
    g = surf.grid
    # distance to {x1^2 + y1^2 = r1^2, x2 = 0} recomputed from the grid
    dist = float(np.hypot(np.hypot(g[..., 0], g[..., 1]) - p.r1, g[..., 2]).min())
    rec = crossings_along_path(g[0], PlanarDiskCylinder(0.0, 0.0, p.r1), closed=False)
    ok = c.tail_deviation <= 1e-9 and dist > 0.01 * p.r1 and len(rec) == 1 and c.ok
    record("2 cylinder contract", ok, f"tail {c.tail_deviation:.2g}, clearance {dist:.4g} (> {0.01 * p.r1:.4g}), crossings {len(rec)}")
    assert ok


# ---------------------------------------------------------------------------
# 3


_PQ_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
SEARCH = 10**6


def maslov_two_box(mu: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """All (p, q) with mu1 p + mu2 q = 2 and |p|, |q| <= 10^6."""
    if mu not in _PQ_CACHE:
        m1, m2 = mu
        if m2 == 0:
            p = np.array([2 // m1], dtype=np.int64)
            q = np.arange(-SEARCH, SEARCH + 1, dtype=np.int64)
            p = np.full_like(q, p[0])
        else:
            p = np.arange(-SEARCH, SEARCH + 1, dtype=np.int64)
            num = 2 - m1 * p
            keep = num % m2 == 0
            p, q = p[keep], num[keep] // m2
            inside = np.abs(q) <= SEARCH
            p, q = p[inside], q[inside]
        _PQ_CACHE[mu] = (p, q)
    return _PQ_CACHE[mu]


def brute_a2(mu: tuple[int, int], w: tuple[Fraction, Fraction]) -> Fraction | None:
    p, q = maslov_two_box(mu)
    den = w[0].denominator * w[1].denominator
    vals = int(w[0].numerator * w[1].denominator) * p + int(w[1].numerator * w[0].denominator) * q
    pos = vals[vals > 0]
    return Fraction(int(pos.min()), den) if len(pos) else None


def random_mu(rng: random.Random) -> tuple[int, int]:
    while True:
        m = (2 * rng.randint(-3, 3), 2 * rng.randint(-3, 3))
        if m != (0, 0) and gcd(*m) == 2:
            return m


def test_a2_oracle(record):
    rng = random.Random(20261014)
    checked = mismatches = 0
    for k in range(1000):
        mu = random_mu(rng)
        w = tuple(Fraction(rng.randint(-400, 400), rng.randint(1, 60)) for _ in range(2))
        expected = brute_a2(mu, w)
        if expected is None:
            continue
        as_pi = k % 2 == 0
        lat = H1LatticeData(mu, tuple(PiMultiple(x) for x in w) if as_pi else w)
        got = a2(lat)
        checked += 1
        mismatches += got != (PiMultiple(expected) if as_pi else expected)

    paper = a2(product_torus_lattice("1", "3/2").lattice) == PI
    # direct minimum of pi (p (r^2 - s^2) + s^2) over p for r = 1, s = 6/5
    r2, s2 = Fraction(1), Fraction(36, 25)
    direct = min(x for x in (p * (r2 - s2) + s2 for p in range(-100, 101)) if x > 0)
    subthreshold = a2(product_torus_lattice("1", "6/5").lattice) == PiMultiple(direct) == PiMultiple(Fraction(3, 25))
    ok = checked >= 900 and mismatches == 0 and paper and subthreshold
    record("3 A2 oracle", ok, f"{checked} lattices, {mismatches} mismatches; A2(L(1,1.5)) = pi {paper}, A2(L(1,1.2)) = 3pi/25 {subthreshold}")
    assert ok


# ---------------------------------------------------------------------------
# 4


def test_monotone_identity(record):
    rng = random.Random(4)
    bad = 0
    for k in range(200):
        mu = random_mu(rng)
        c = Fraction(rng.randint(1, 500), rng.randint(1, 50))
        cc = PiMultiple(c) if k % 2 else c
        lat = H1LatticeData(mu, (cc * mu[0], cc * mu[1]))
        bad += not (monotonicity(lat) == cc and a2(lat) == 2 * cc)
    record("4 monotone identity", bad == 0, f"200 lattices, {bad} failures of a2 = 2c")
    assert bad == 0


# ---------------------------------------------------------------------------
# 5


def test_index_bookkeeping(record):
    rng = random.Random(5)
    fails = 0
    for _ in range(10_000):
        b = random_building(rng)
        r = audit_building(b)
        n_orbits = len({p.orbit for c in b.components for p in c.punctures})
        c1 = sum(c.c1 for c in b.components)
        total = sum(-2 + len(c.punctures) + sum(p.positive for p in c.punctures) + 2 * c.c1 for c in b.components)
        low = [c for c in b.components if c.domain != "top_level"]
        low_total = sum(r.indices[c.id] for c in low)
        low_expected = -sum(2 - len(c.punctures) for c in low) + n_orbits - 1
        fails += not (
            r.ok
            and r.total_index == total == -2 * len(b.components) + 3 * n_orbits - 2 + 2 * c1
            and low_total == low_expected
        )
    g = audit_building(golden_building())
    golden = g.ok and g.top_level_sum == 1
    muts = golden_mutations()
    caught = 0
    for b, rule in muts.values():
        v = [x for x in audit_building(b).violations if x.rule == rule]
        caught += bool(v) and v[0].citation == RULES[rule]
    ok = fails == 0 and golden and caught == len(muts) == 6
    record("5 index double-entry", ok, f"10000 buildings, {fails} failures; golden top sum {g.top_level_sum}; {caught}/6 mutations cited")
    assert ok


# ---------------------------------------------------------------------------
# 6


def test_cz_and_plane_index(record):
    table = (cz_index("minus_delta"), cz_index("plus_delta")) == (1, 0)
    rng = random.Random(6)
    bad = 0
    for k in range(500):
        c1 = rng.randint(-3, 6)
        domain = rng.choice(["top_level", "neck_1", "neck_2", "cotangent_bottom"])
        u = ComponentSpec(f"p{k}", domain, (Puncture("o", "-"),), c1, plane=True)
        bad += fredholm_index(u) != -1 + maslov_from_chern(c1)
    ok = table and bad == 0
    record("6 CZ and plane index", ok, f"cz = (1, 0) {table}; ind = -1 + mu on 500 planes with a negative end, {bad} failures")
    assert ok


# ---------------------------------------------------------------------------
# 7

R2 = math.sqrt(2.0)
OBSTRUCTION_TABLE = [
    # r, s, a, b, obstructed
    ("1", "3/2", "9/10", "10", True),
    ("1", "3/2", "11/10", "10", False),
    ("1", "6/5", "9/10", "10", False),
    ("1", R2, "9/10", "10", True),
    ("1", R2 * (1 - 1e-6), "9/10", "10", False),
    ("1", "2", "1", "5", False),
    ("1", "2", "999/1000", "5", True),
    ("2", "3", "1", "1", True),
    ("2", "2", "1", "1", False),
    ("1", "1", "1/2", "1", False),
    ("1", "10", "1/2", "1", True),
    ("3", "5", "2", "inf", True),
    ("3", "4", "2", "inf", False),
    ("1/2", "1", "1/4", "3", True),
    ("1/2", "1", "1/2", "3", False),
    ("5", "8", "4", "4", True),
    ("5", "7", "4", "4", False),
    (1.0, 1.5, 0.9, 10.0, True),
    (1.0, 1.5, 1.0, 10.0, False),
    ("7/5", "2", "1", "2", True),
]


def test_capacity(record):
    values = capacity_polydisk(1, 2) == PI and capacity_polydisk(1, math.inf) == PI
    wrong = []
    for r, s, a, b, want in OBSTRUCTION_TABLE:
        b = math.inf if b == "inf" else b
        if embedding_obstruction(r, s, a, b).obstructed != want:
            wrong.append((r, s, a, b))
    ok = values and not wrong and len(OBSTRUCTION_TABLE) == 20
    record("7 capacity", ok, f"c(P(1,2)) = c(Z(1)) = pi {values}; {20 - len(wrong)}/20 obstruction cases")
    assert ok, wrong


# ---------------------------------------------------------------------------
# 8


def turning(points: np.ndarray) -> int:
    """Total turning of the edge vectors, in whole turns; 0 for a constant curve."""
    if np.ptp(points, axis=0).max() <= 1e-12:
        return 0
    e = np.roll(points, -1, axis=0) - points
    ang = np.arctan2(e[:, 1], e[:, 0])
    step = np.angle(np.exp(1j * (np.roll(ang, -1) - ang)))
    return round(float(step.sum()) / (2 * math.pi))


def plane_curves(n: int) -> dict[str, np.ndarray]:
    th = 2 * np.pi * np.arange(n) / n
    return {
        "circle": np.column_stack([np.cos(th), np.sin(th)]),
        "reversed_ellipse": np.column_stack([2 * np.cos(th), -0.7 * np.sin(th)]),
        "limacon": np.column_stack([(1 + 0.4 * np.cos(th)) * np.cos(th), (1 + 0.4 * np.cos(th)) * np.sin(th)]),
        "figure_eight": np.column_stack([np.sin(th), np.sin(th) * np.cos(th)]),
        "double_circle": np.column_stack([1.5 * np.cos(2 * th), 1.5 * np.sin(2 * th)]),
    }


def test_maslov(record, pair256):
    close_up = [pair256.L1.maslov_sigma, pair256.L1.maslov_tau, pair256.L2.maslov_sigma, pair256.L2.maslov_tau]
    closeup_ok = close_up == [2, 2, 2, 2]

    n = 128
    curves = plane_curves(n)
    names = sorted(curves)
    rng = random.Random(8)
    mismatches = 0
    for k in range(50):
        frame, core = curves[rng.choice(names)], curves[rng.choice(names)]
        surf = lift_closed(np.broadcast_to(frame, (n, n, 2)).copy(), core, np.zeros(n), 1.0)
        while True:
            k1, k2 = rng.randint(-2, 2), rng.randint(-2, 2)
            if (k1, k2) != (0, 0):
                break
        path = [((m * k1) % n, (m * k2) % n) for m in range(n)]
        pts = np.array([surf.grid[i, j] for i, j in path])
        expected = 2 * (turning(pts[:, :2]) + turning(pts[:, 2:]))
        mismatches += maslov_index(surf, path) != expected
    ok = closeup_ok and mismatches == 0
    record("8 Maslov", ok, f"close-up sigma/tau {close_up}; det^2 vs 2(rot1 + rot2) on 50 product loops, {mismatches} mismatches")
    assert ok


# ---------------------------------------------------------------------------
# 9


def test_flat_disks_and_energy(record, pair256):
    L2 = pair256.L2
    r2 = math.sqrt(0.25)
    worst_area = 0.0
    within = True
    for h in L2.disk_family_heights:
        for s in (0.0, 0.5, 1.0):
            d = flat_disk_family(L2, h, s)
            worst_area = max(worst_area, abs(d.area - math.pi * r2**2))
            within &= d.boundary_distance <= d.grid_spacing
    getcontext().prec = 40
    e = Decimal(1).exp()
    c_ref = (1 + e) / (e - 1)
    eb = energy_budget(1.0)
    coeff = abs(Decimal(ENERGY_COEFF) - c_ref) / c_ref < Decimal("1e-12")
    total = abs(Decimal(eb.total_max) - (1 + 2 * c_ref)) / (1 + 2 * c_ref) < Decimal("1e-12")
    ok = within and worst_area <= 1e-8 and coeff and total
    record("9 flat disks and energy", ok, f"area error {worst_area:.2g}, boundary within one spacing {within}; coefficients to 12 digits {coeff and total}")
    assert ok


# ---------------------------------------------------------------------------
# 10


def test_verdict_table(record, pair256):
    cl1, cl2 = clifford_descriptor("1"), clifford_descriptor("2")
    ch1, ch2 = chekanov_descriptor("1"), chekanov_descriptor("2")
    pr = product_torus_lattice
    L1 = TorusDescriptor(pair256.L1.lattice(), "close_up")
    L2 = TorusDescriptor(pair256.L2.lattice(), "close_up")
    cases = [
        (cl1, cl2, None, "smoothly_unlinked", "a", "clifford-pairs-unlink"),
        (cl2, cl1, None, "smoothly_unlinked", "a", "clifford-pairs-unlink"),
        (ch1, ch1, None, "smoothly_unlinked", "b", "equal-level-monotone-unlink"),
        (ch1, cl1, None, "smoothly_unlinked", "b", "equal-level-monotone-unlink"),
        (cl1, ch2, None, "smoothly_unlinked", "c", "two-unit-counts-trivialize-pi1"),
        (ch1, cl2, None, "needs_pi1_input", "d", "monotone-bounds-solid-torus"),
        (ch1, cl2, True, "smoothly_unlinked", "d", "pi1-image-criterion"),
        (ch1, pr("2", "3"), False, "bounds_solid_torus_in_complement", "d", "monotone-bounds-solid-torus"),
        (pr("1", "3/2"), pr("2", "3"), None, "homologically_unlinked", "e", "admissible-homological-unlink"),
        (pr("1", "6/5"), pr("2", "3"), None, "no_conclusion", "f", "no-applicable-theorem"),
        (pr("2", "3"), pr("1", "3/2"), None, "no_conclusion", "f", "no-applicable-theorem"),
        (L1, L2, None, "no_conclusion", "f", "no-applicable-theorem"),
    ]
    wrong = []
    for k, (a, b, flag, verdict, rule, cite) in enumerate(cases):
        v = unlinking_verdict(a, b, flag)
        if (v.verdict, v.rule) != (verdict, rule) or cite not in v.citations:
            wrong.append((k, v.verdict, v.rule, v.citations))

    cert = homological_linking_certificate(pair256.L1, [pair256.L2.sigma, pair256.L2.tau])
    engine = unlinking_verdict(L1, L2)
    # the engine draws no conclusion, which is consistent with an actual linked pair
    consistent = engine.verdict == "no_conclusion" and "homologically_unlinked" not in engine.conclusions and cert.linked
    ok = not wrong and len(cases) == 12 and consistent
    record("10 verdict engine", ok, f"{12 - len(wrong)}/12 cases; close-up pair verdict {engine.verdict} alongside certificate linked={cert.linked}")
    assert ok, wrong
