"""Index bookkeeping for hypothesised holomorphic buildings.

A building is a list of genus-0 punctured curves in four kinds of domain
(the top level and three lower levels), glued along orbits. Every orbit but
one appears once as a negative end and once as a positive end; the exception
``rho`` is only ever a negative end. Indices follow

    ind(u) = -2 + #punctures + #positive punctures + 2 c1(u)

and the audit checks the summed identities and lower bounds that any building
arising as a limit of Maslov-2 disks must satisfy. Nothing here looks at
actual curves; buildings are combinatorial input.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .errors import CoverInconsistent, MatchingInvalid, NonPositiveArea, NoPunctures, NotAPlane, SchemaError

DOMAINS = ("top_level", "neck_1", "neck_2", "cotangent_bottom")
POLARITIES = ("positive", "negative")
PROFILES = {"two_torus": 1, "sphere": 2}

RULES: dict[str, str] = {
    "index-double-entry": "summed component indices equal -2N + (3K - 2) + 2 sum c1",
    "limit-of-planes-count": "a limit of planes has as many orbits as components, and total index N - 2 + 2 c1",
    "lower-level-identity": "lower-level indices sum to -sum chi + (K - 1)",
    "top-level-budget": "top-level indices sum to at most the profile budget (1 for two tori, 2 for a sphere)",
    "top-level-negative-punctures": "top-level components have only negative punctures",
    "component-index-nonnegative": "every component has index at least 0",
    "plane-index-at-least-one": "a plane has index at least 1, with equality exactly when simply covered of Maslov index 2",
    "plane-in-lower-level": "no plane is asymptotic to an orbit in a lower level",
    "cover-riemann-hurwitz": "a branched cover of a plane by a plane has 2 = 2d - b",
    "cover-puncture-bound": "a degree d cover satisfies d k_v <= k_u + b",
    "cover-chern-multiplicativity": "c1 of a degree d cover is d times c1 of the underlying curve",
}

CZ_TABLE = {"minus_delta": 1, "plus_delta": 0}
ENERGY_COEFF = (1.0 + math.e) / (math.e - 1.0)


def cz_index(perturbation: str) -> int:
    """Conley-Zehnder index of a perturbed Morse-Bott orbit in the fixed trivialization."""
    try:
        return CZ_TABLE[perturbation]
    except KeyError:
        raise ValueError(f"perturbation must be one of {sorted(CZ_TABLE)}") from None


@dataclass(frozen=True)
class Puncture:
    orbit: str
    polarity: str

    def __post_init__(self) -> None:
        pol = {"+": "positive", "-": "negative", "pos": "positive", "neg": "negative"}.get(self.polarity, self.polarity)
        if pol not in POLARITIES:
            raise SchemaError(f"unknown polarity {self.polarity!r}")
        object.__setattr__(self, "polarity", pol)
        object.__setattr__(self, "orbit", str(self.orbit))

    @property
    def positive(self) -> bool:
        return self.polarity == "positive"


@dataclass(frozen=True)
class CoverData:
    d: int
    b: int
    k_v: int
    c1_v: int


@dataclass(frozen=True)
class ComponentSpec:
    id: str
    domain: str
    punctures: tuple[Puncture, ...]
    c1: int
    plane: bool = False
    cover: CoverData | None = None
    genus: int = 0

    def __post_init__(self) -> None:
        if self.domain not in DOMAINS:
            raise SchemaError(f"component {self.id}: unknown domain {self.domain!r}")
        if self.genus != 0:
            raise SchemaError(f"component {self.id}: only genus-0 components are supported")
        pts = tuple(p if isinstance(p, Puncture) else Puncture(*p) for p in self.punctures)
        object.__setattr__(self, "punctures", pts)
        if self.plane and len(pts) != 1:
            raise SchemaError(f"component {self.id}: a plane has exactly one puncture, got {len(pts)}")
        if self.cover is not None:
            cv = self.cover
            if not (isinstance(cv.d, int) and cv.d > 1 and cv.b >= 0 and cv.k_v >= 1):
                raise SchemaError(f"component {self.id}: cover needs d > 1, b >= 0, k_v >= 1")

    @property
    def n_punctures(self) -> int:
        return len(self.punctures)

    @property
    def n_positive(self) -> int:
        return sum(p.positive for p in self.punctures)

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.n_punctures


def fredholm_index(c: ComponentSpec) -> int:
    if c.n_punctures == 0:
        raise NoPunctures(f"component {c.id} has no punctures")
    return -2 + c.n_punctures + c.n_positive + 2 * c.c1


def maslov_from_chern(c1_phi: int, plane: bool = True) -> int:
    """Maslov index of the compactified plane with relative Chern number c1."""
    if not plane:
        raise NotAPlane("the Maslov-Chern relation applies to planes only")
    return 2 * c1_phi


def underlying_index(cv: CoverData) -> int:
    return -2 + cv.k_v + 2 * cv.c1_v


@dataclass(frozen=True)
class CoverCheck:
    ok: bool
    index: int
    underlying_index: int
    bound: int  # d * underlying_index, a lower bound for index


def cover_check(c: ComponentSpec) -> CoverCheck:
    if c.cover is None:
        raise ValueError(f"component {c.id} carries no cover data")
    cv = c.cover
    if 2 != 2 * cv.d - cv.b:
        raise CoverInconsistent(f"component {c.id}: 2 != 2d - b = {2 * cv.d - cv.b}", "cover-riemann-hurwitz")
    if cv.d * cv.k_v > c.n_punctures + cv.b:
        raise CoverInconsistent(
            f"component {c.id}: d k_v = {cv.d * cv.k_v} exceeds k_u + b = {c.n_punctures + cv.b}", "cover-puncture-bound"
        )
    if c.c1 != cv.d * cv.c1_v:
        raise CoverInconsistent(f"component {c.id}: c1 = {c.c1} but d c1_v = {cv.d * cv.c1_v}", "cover-chern-multiplicativity")
    ind = fredholm_index(c)
    v = underlying_index(cv)
    return CoverCheck(ind >= cv.d * v, ind, v, cv.d * v)


@dataclass(frozen=True)
class MatchEntry:
    neg: str
    pos: str | None


@dataclass(frozen=True)
class BuildingSpec:
    components: tuple[ComponentSpec, ...]
    limit_of_planes: bool = False
    profile: str = "two_torus"
    omega_u: float | None = None
    forbid_lower_planes: bool = False
    matching: Mapping[str, MatchEntry] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        if self.profile not in PROFILES:
            raise SchemaError(f"unknown audit profile {self.profile!r}; expected one of {sorted(PROFILES)}")
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise SchemaError("component ids must be distinct")
        derived = derive_matching(self.components)
        if self.matching is not None:
            given = {str(k): v if isinstance(v, MatchEntry) else MatchEntry(v["neg"], v.get("pos")) for k, v in self.matching.items()}
            if given != derived:
                diff = sorted(o for o in set(given) | set(derived) if given.get(o) != derived.get(o))
                raise MatchingInvalid(f"stated matching disagrees with the punctures at orbits {diff}")
        object.__setattr__(self, "matching", derived)

    @property
    def N(self) -> int:
        return len(self.components)

    @property
    def K(self) -> int:
        return len(self.matching)

    @property
    def rho(self) -> str:
        return next(o for o, m in self.matching.items() if m.pos is None)

    @property
    def budget(self) -> int:
        return PROFILES[self.profile]


def derive_matching(components: Iterable[ComponentSpec]) -> dict[str, MatchEntry]:
    """Orbit -> (component with the negative end, component with the positive end)."""
    neg: dict[str, list[str]] = defaultdict(list)
    pos: dict[str, list[str]] = defaultdict(list)
    for c in components:
        for p in c.punctures:
            (pos if p.positive else neg)[p.orbit].append(c.id)
    out: dict[str, MatchEntry] = {}
    for o in sorted(set(neg) | set(pos)):
        if len(neg[o]) > 1 or len(pos[o]) > 1:
            raise MatchingInvalid(f"orbit {o} is matched more than once (negative ends {neg[o]}, positive ends {pos[o]})")
        if not neg[o]:
            raise MatchingInvalid(f"orbit {o} appears only as a positive end")
        out[o] = MatchEntry(neg[o][0], pos[o][0] if pos[o] else None)
    unmatched = [o for o, m in out.items() if m.pos is None]
    if len(unmatched) != 1:
        raise MatchingInvalid(f"exactly one orbit may lack a positive end, found {unmatched}")
    return out


@dataclass(frozen=True)
class Violation:
    rule: str
    component_ids: tuple[str, ...]
    detail: str = ""

    @property
    def citation(self) -> str:
        return RULES[self.rule]

    def as_dict(self) -> dict[str, Any]:
        return {"rule": self.rule, "citation": self.citation, "component_ids": list(self.component_ids), "detail": self.detail}


@dataclass(frozen=True)
class EnergyBudget:
    E_alpha_max: float
    E_omega_max: float
    total_max: float


def energy_budget(omega_u: float) -> EnergyBudget:
    """Upper bounds on the two SFT energies of a curve of symplectic area omega_u."""
    w = float(omega_u)
    if not (math.isfinite(w) and w > 0):
        raise NonPositiveArea(f"symplectic area must be positive, got {omega_u}")
    return EnergyBudget(ENERGY_COEFF * w, (1.0 + ENERGY_COEFF) * w, (1.0 + 2.0 * ENERGY_COEFF) * w)


@dataclass(frozen=True)
class AuditReport:
    indices: dict[str, int]
    total_index: int
    closed_form_total: int
    top_level_sum: int
    lower_level_sum: int
    N: int
    K: int
    rho: str
    violations: tuple[Violation, ...]
    notes: tuple[str, ...] = ()
    energy: EnergyBudget | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def rules_broken(self) -> set[str]:
        return {v.rule for v in self.violations}


def audit_building(b: BuildingSpec) -> AuditReport:
    comps = sorted(b.components, key=lambda c: c.id)
    viol: list[Violation] = []
    notes: list[str] = []
    ind = {c.id: fredholm_index(c) for c in comps}
    N, K = b.N, b.K
    c1_total = sum(c.c1 for c in comps)
    total = sum(ind.values())

    closed = -2 * N + (3 * K - 2) + 2 * c1_total
    if total != closed:
        viol.append(Violation("index-double-entry", tuple(ind), f"sum {total} != closed form {closed}"))

    if b.limit_of_planes:
        if K != N:
            viol.append(Violation("limit-of-planes-count", tuple(ind), f"K = {K} but N = {N}"))
        elif total != N - 2 + 2 * c1_total:
            viol.append(Violation("limit-of-planes-count", tuple(ind), f"total {total} != N - 2 + 2 c1 = {N - 2 + 2 * c1_total}"))

    top = [c for c in comps if c.domain == "top_level"]
    low = [c for c in comps if c.domain != "top_level"]
    for c in top:
        if c.n_positive:
            viol.append(Violation("top-level-negative-punctures", (c.id,), f"{c.n_positive} positive puncture(s)"))

    low_sum = sum(ind[c.id] for c in low)
    low_expected = -sum(c.euler_characteristic for c in low) + (K - 1)
    if low_sum != low_expected:
        viol.append(Violation("lower-level-identity", tuple(c.id for c in low), f"sum {low_sum} != {low_expected}"))

    top_sum = sum(ind[c.id] for c in top)
    if top_sum > b.budget:
        viol.append(Violation("top-level-budget", tuple(c.id for c in top), f"sum {top_sum} > budget {b.budget}"))

    for c in comps:
        i = ind[c.id]
        if i < 0:
            viol.append(Violation("component-index-nonnegative", (c.id,), f"index {i}"))
        if c.plane:
            mu = maslov_from_chern(c.c1)
            if i < 1:
                viol.append(Violation("plane-index-at-least-one", (c.id,), f"index {i}, Maslov {mu}"))
            elif i == 1 and (mu != 2 or c.cover is not None):
                viol.append(Violation("plane-index-at-least-one", (c.id,), "index 1 needs a simple Maslov-2 plane"))
            if b.forbid_lower_planes and c.domain != "top_level":
                viol.append(Violation("plane-in-lower-level", (c.id,), c.domain))
        if c.domain in ("neck_1", "neck_2"):
            alt = -c.euler_characteristic + 2 * c.c1
            if alt != i:
                notes.append(f"{c.id}: index without the positive-puncture term is {alt}, full count {i}; bound checked on the full count")
        if c.cover is not None:
            try:
                cc = cover_check(c)
                if not cc.ok:
                    notes.append(f"{c.id}: index {cc.index} below d * ind(v) = {cc.bound}")
            except CoverInconsistent as e:
                viol.append(Violation(e.rule, (c.id,), str(e)))

    energy = energy_budget(b.omega_u) if b.omega_u is not None else None
    return AuditReport(ind, total, closed, top_sum, low_sum, N, K, b.rho, tuple(viol), tuple(notes), energy)


# ---------------------------------------------------------------------------
# reference building and mutations


def _comp(id: str, domain: str, punctures: Sequence[tuple[str, str]], c1: int, plane: bool = False, cover: CoverData | None = None) -> ComponentSpec:
    return ComponentSpec(id, domain, tuple(Puncture(o, p) for o, p in punctures), c1, plane, cover)


def golden_building() -> BuildingSpec:
    """A Maslov-2 plane on top, a neck cylinder below it, and a cotangent-level
    cylinder ending on the one unmatched orbit. Passes every check with
    top-level index sum 1."""
    return BuildingSpec(
        (
            _comp("P", "top_level", [("o1", "-")], 1, plane=True),
            _comp("C", "neck_2", [("o1", "+"), ("o2", "-")], 0),
            _comp("B", "cotangent_bottom", [("o2", "+"), ("rho", "-")], 0),
        ),
        limit_of_planes=True,
    )


def golden_mutations() -> dict[str, tuple[BuildingSpec, str]]:
    """Single-fault variants of :func:`golden_building`, each with the rule it breaks."""
    P = _comp("P", "top_level", [("o1", "-")], 1, plane=True)
    C = _comp("C", "neck_2", [("o1", "+"), ("o2", "-")], 0)
    B = _comp("B", "cotangent_bottom", [("o2", "+"), ("rho", "-")], 0)

    def bld(*cs: ComponentSpec, limit: bool = True) -> BuildingSpec:
        return BuildingSpec(tuple(cs), limit_of_planes=limit)

    return {
        "plane_maslov_four": (bld(_comp("P", "top_level", [("o1", "-")], 2, plane=True), C, B), "top-level-budget"),
        "plane_maslov_zero": (bld(_comp("P", "top_level", [("o1", "-")], 0, plane=True), C, B), "plane-index-at-least-one"),
        "neck_chern_one": (bld(P, _comp("C", "neck_2", [("o1", "+"), ("o2", "-")], 1), B), "lower-level-identity"),
        "neck_chern_negative": (bld(P, _comp("C", "neck_2", [("o1", "+"), ("o2", "-")], -1), B), "component-index-nonnegative"),
        "extra_orbit_in_limit": (
            bld(
                P,
                _comp("C", "neck_2", [("o1", "+"), ("o2", "-"), ("o3", "-")], 0),
                _comp("B", "cotangent_bottom", [("o2", "+"), ("o3", "+"), ("rho", "-")], 0),
            ),
            "limit-of-planes-count",
        ),
        "cover_odd_branching": (
            bld(_comp("P", "top_level", [("o1", "-")], 1, plane=True, cover=CoverData(2, 1, 1, 1)), C, B),
            "cover-riemann-hurwitz",
        ),
    }
