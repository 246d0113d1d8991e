"""Arithmetic on the area/Maslov lattice of a Lagrangian torus.

A torus L in R^4 has pi_2(R^4, L) = H_1(L) = Z^2. The Maslov class ``mu`` and
the area class ``omega`` are homomorphisms on it, recorded by their values on
a basis. The Maslov-2 classes form a coset ``base + n * generator`` of ker mu,
so the smallest positive Maslov-2 area is the minimum of an arithmetic
progression.

Areas are exact (:class:`PiMultiple` for rational multiples of pi,
``Fraction`` for plain rationals) or floats. Comparisons are exact when both
sides are exact of the same kind, else use a 1e-12 relative tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Any, Sequence, Union

from .errors import (
    Monotone,
    NoMaslovTwoClass,
    NonMonotoneInput,
    NonPositive,
    NonPositiveRadius,
    NoPositiveArea,
    OrderViolation,
)

REL_TOL = 1e-12


@total_ordering
class PiMultiple:
    """The exact area ``coef * pi`` with ``coef`` rational."""

    __slots__ = ("coef",)

    def __init__(self, coef: Any):
        object.__setattr__(self, "coef", Fraction(coef))

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("PiMultiple is immutable")

    def __float__(self) -> float:
        return float(self.coef) * math.pi

    def __repr__(self) -> str:
        return f"PiMultiple({self.coef})"

    def __str__(self) -> str:
        p, q = self.coef.numerator, self.coef.denominator
        if p == 0:
            return "0"
        num = "pi" if p == 1 else "-pi" if p == -1 else f"{p}*pi"
        return num if q == 1 else f"{num}/{q}"

    def __hash__(self) -> int:
        return hash(("pi", self.coef))

    def __neg__(self) -> "PiMultiple":
        return PiMultiple(-self.coef)

    def __abs__(self) -> "PiMultiple":
        return PiMultiple(abs(self.coef))

    def __add__(self, other: Any):
        if isinstance(other, PiMultiple):
            return PiMultiple(self.coef + other.coef)
        if isinstance(other, int) and other == 0:
            return self
        return float(self) + float(other)

    __radd__ = __add__

    def __sub__(self, other: Any):
        return self + (-other)

    def __rsub__(self, other: Any):
        return (-self) + other

    def __mul__(self, other: Any):
        if isinstance(other, (int, Fraction)):
            return PiMultiple(self.coef * other)
        return float(self) * float(other)

    __rmul__ = __mul__

    def __truediv__(self, other: Any):
        if isinstance(other, PiMultiple):
            return self.coef / other.coef
        if isinstance(other, (int, Fraction)):
            return PiMultiple(self.coef / other)
        return float(self) / float(other)

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, PiMultiple):
            return self.coef == other.coef
        if isinstance(other, (int, float, Fraction)):
            return float(self) == float(other)
        return NotImplemented

    def __lt__(self, other: Any) -> bool:
        if isinstance(other, PiMultiple):
            return self.coef < other.coef
        return float(self) < float(other)


Area = Union[PiMultiple, Fraction, float]
ClassZ2 = tuple[int, int]


def as_area(x: Any) -> Area:
    """Normalize an area: ints become exact rationals, strings like "pi/4" or
    "3*pi/25" become :class:`PiMultiple`, other strings exact rationals."""
    if isinstance(x, (PiMultiple, Fraction)):
        return x
    if isinstance(x, bool):
        raise TypeError("area cannot be a bool")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_area(x)
    v = float(x)
    if not math.isfinite(v):
        raise ValueError("area must be finite")
    return v


def parse_area(text: str) -> Area:
    t = text.replace(" ", "").lower()
    if "pi" not in t:
        return Fraction(t)
    num, _, den = t.partition("/")
    num = num.replace("*pi", "").replace("pi*", "").replace("pi", "")
    coef = Fraction(1 if num in ("", "+") else -1 if num == "-" else Fraction(num))
    return PiMultiple(coef / Fraction(den) if den else coef)


def is_exact(*xs: Any) -> bool:
    return all(isinstance(x, PiMultiple) for x in xs) or all(isinstance(x, Fraction) for x in xs)


def compare(a: Area, b: Area) -> int:
    """-1, 0, 1 with exact or tolerance-based equality."""
    if is_exact(a, b):
        return (a > b) - (a < b)
    fa, fb = float(a), float(b)
    if abs(fa - fb) <= REL_TOL * max(abs(fa), abs(fb)):
        return 0
    return 1 if fa > fb else -1


def _is_zero(x: Area, scale: float) -> bool:
    if isinstance(x, (PiMultiple, Fraction)):
        return x == 0
    return abs(x) <= REL_TOL * scale


def _positive(x: Area, scale: float) -> bool:
    return not _is_zero(x, scale) and float(x) > 0


def area_text(x: Area) -> str:
    if isinstance(x, PiMultiple):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


# ---------------------------------------------------------------------------
# lattice data


@dataclass(frozen=True)
class H1LatticeData:
    mu: tuple[int, int]
    omega: tuple[Area, Area]
    provenance: str = ""

    def __post_init__(self) -> None:
        mu = tuple(int(m) for m in self.mu)
        if len(mu) != 2 or any(m != mm for m, mm in zip(mu, self.mu)):
            raise ValueError("mu must be a pair of integers")
        if any(m % 2 for m in mu):
            raise ValueError(f"Maslov values on an orientable torus are even, got {mu}")
        om = tuple(as_area(w) for w in self.omega)
        if len(om) != 2:
            raise ValueError("omega must be a pair")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "omega", om)

    def area(self, c: Sequence[int]) -> Area:
        return c[0] * self.omega[0] + c[1] * self.omega[1]

    def maslov(self, c: Sequence[int]) -> int:
        return c[0] * self.mu[0] + c[1] * self.mu[1]

    @property
    def scale(self) -> float:
        return max(abs(float(self.omega[0])), abs(float(self.omega[1])), 1e-300)

    def transformed(self, M: Sequence[Sequence[int]]) -> "H1LatticeData":
        """Values on the new basis e'_i = sum_j M[i][j] e_j."""
        mu = tuple(M[i][0] * self.mu[0] + M[i][1] * self.mu[1] for i in range(2))
        om = tuple(M[i][0] * self.omega[0] + M[i][1] * self.omega[1] for i in range(2))
        return H1LatticeData(mu, om, self.provenance)

    def scaled(self, k: Any) -> "H1LatticeData":
        return H1LatticeData(self.mu, tuple(w * k for w in self.omega), self.provenance)


@dataclass(frozen=True)
class Coset:
    base: ClassZ2
    generator: ClassZ2

    def member(self, n: int) -> ClassZ2:
        return (self.base[0] + n * self.generator[0], self.base[1] + n * self.generator[1])


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a x + b y = g = gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def maslov_two_coset(l: H1LatticeData) -> Coset:
    m1, m2 = l.mu
    if m1 == 0 and m2 == 0:
        raise NoMaslovTwoClass("mu vanishes identically")
    g, x, y = extended_gcd(m1, m2)
    if 2 % g:
        raise NoMaslovTwoClass(f"gcd {g} of the Maslov values does not divide 2")
    k = 2 // g
    return Coset((k * x, k * y), (m2 // g, -m1 // g))


@dataclass(frozen=True)
class _CosetMin:
    coset: Coset  # generator oriented to positive area
    n: int | None  # None when every Maslov-2 class has the same area
    value: Area


def _coset_minimum(l: H1LatticeData) -> _CosetMin:
    cs = maslov_two_coset(l)
    scale = l.scale
    w = l.area(cs.generator)
    b = l.area(cs.base)
    if _is_zero(w, scale):
        if _positive(b, scale):
            return _CosetMin(cs, None, b)
        raise NoPositiveArea("every Maslov-2 class has non-positive area")
    if float(w) < 0:
        cs = Coset(cs.base, (-cs.generator[0], -cs.generator[1]))
        w = -w
    ratio = (-b) / w
    n = math.floor(ratio) + 1
    # A(n) = b + n w is increasing in n; step to the first positive value
    while _positive(b + (n - 1) * w, scale):
        n -= 1
    while not _positive(b + n * w, scale):
        n += 1
    return _CosetMin(cs, n, b + n * w)


def a2(l: H1LatticeData) -> Area:
    """Smallest positive area among Maslov-2 classes."""
    return _coset_minimum(l).value


def monotonicity(l: H1LatticeData) -> Area | None:
    """The factor c with omega = c mu, if one exists and is positive."""
    (m1, m2), (w1, w2) = l.mu, l.omega
    if m1 == 0 and m2 == 0:
        return None
    cross = w1 * m2 - w2 * m1
    if is_exact(w1, w2):
        if cross != 0:
            return None
    elif abs(float(cross)) > REL_TOL * max(abs(float(w1 * m2)), abs(float(w2 * m1))):
        return None
    if m1 != 0:
        c = w1 / m1 if is_exact(w1, w2) else float(w1) / m1
    else:
        c = w2 / m2 if is_exact(w1, w2) else float(w2) / m2
    if isinstance(c, PiMultiple):
        return c if c.coef > 0 else None
    return c if c > 0 else None


def mu_infimal(l: H1LatticeData) -> ClassZ2:
    """The Maslov-2 class of least positive area (unique unless monotone)."""
    cm = _coset_minimum(l)
    if cm.n is None:
        raise Monotone("all Maslov-2 classes have the same area, so the minimizer is not unique")
    return cm.coset.member(cm.n)


@dataclass(frozen=True)
class MuTwoBasis:
    alpha0: ClassZ2
    alpha1: ClassZ2
    doubling_ok: bool


def mu_two_basis(l: H1LatticeData) -> MuTwoBasis:
    """alpha0 = mu-infimal class, alpha1 = next class up the coset.

    ``omega(alpha1) >= 2 omega(alpha0)`` holds for every lattice, not just
    those of actual tori: alpha0 - (alpha1 - alpha0) is a Maslov-2 class with
    area below A2, so its area cannot be positive.
    """
    cm = _coset_minimum(l)
    if cm.n is None:
        raise Monotone("no unique mu-infimal class on a monotone lattice")
    a0 = cm.coset.member(cm.n)
    a1 = cm.coset.member(cm.n + 1)
    w0, w1 = l.area(a0), l.area(a1)
    gap = w1 - 2 * w0
    ok = _is_zero(gap, l.scale) or float(gap) > 0
    return MuTwoBasis(a0, a1, ok)


def maslov_zero_min_positive_area(l: H1LatticeData) -> Area:
    """Least positive area of a Maslov-0 class; ``math.inf`` if there is none.

    Maslov-0 classes are the multiples of the coset generator, so the answer
    is |omega(generator)| unless that vanishes.
    """
    cs = maslov_two_coset(l)
    w = l.area(cs.generator)
    if _is_zero(w, l.scale):
        return math.inf
    return w if float(w) > 0 else -w


# ---------------------------------------------------------------------------
# torus descriptors


SQRT2_SQ = Fraction(2)  # admissibility threshold on (s/r)^2


@dataclass(frozen=True)
class TorusDescriptor:
    lattice: H1LatticeData
    kind: str = "custom"
    enumerative: dict[ClassZ2, int] | None = None
    pi1_image_generator: int | None = None
    admissible: bool | None = None
    admissible_reason: str = ""
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("clifford", "chekanov", "product", "close_up", "custom"):
            raise ValueError(f"unknown torus kind {self.kind!r}")
        if self.enumerative is not None:
            enum = {tuple(int(v) for v in k): int(n) for k, n in self.enumerative.items()}
            if any(n not in (0, 1) for n in enum.values()):
                raise ValueError("enumerative counts are mod 2")
            object.__setattr__(self, "enumerative", enum)

    @property
    def a2(self) -> Area:
        return a2(self.lattice)

    @property
    def monotone_factor(self) -> Area | None:
        return monotonicity(self.lattice)


def _exact_length(x: Any) -> Fraction | float:
    if isinstance(x, bool):
        raise TypeError("length cannot be a bool")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def product_torus_lattice(r: Any, s: Any) -> TorusDescriptor:
    """The torus |z1| = r, |z2| = s, on the basis (disk x point, point x disk).

    Exact input (int, Fraction, decimal string) gives exact areas.
    """
    R, S = _exact_length(r), _exact_length(s)
    if not (float(R) > 0 and float(S) > 0):
        raise NonPositiveRadius(f"radii must be positive, got {r}, {s}")
    if isinstance(R, Fraction) and isinstance(S, Fraction):
        om: tuple[Area, Area] = (PiMultiple(R * R), PiMultiple(S * S))
        lo, hi = min(R, S), max(R, S)
        ratio_sq = (hi / lo) ** 2
        same = R == S
        adm = ratio_sq >= SQRT2_SQ
    else:
        fr, fs = float(R), float(S)
        om = (math.pi * fr * fr, math.pi * fs * fs)
        ratio_sq = (max(fr, fs) / min(fr, fs)) ** 2
        same = abs(fr - fs) <= REL_TOL * max(fr, fs)
        adm = ratio_sq >= 2.0 * (1.0 - REL_TOL)
    lat = H1LatticeData((2, 2), om, f"product({r},{s})")
    if same:
        return TorusDescriptor(
            lat, "clifford", {(1, 0): 1, (0, 1): 1}, admissible=False, admissible_reason="monotone", label=f"clifford:{r}"
        )
    reason = "ratio at least sqrt(2)" if adm else "below threshold, unknown"
    return TorusDescriptor(lat, "product", admissible=bool(adm), admissible_reason=reason, label=f"product:{r},{s}")


def clifford_descriptor(r: Any) -> TorusDescriptor:
    return product_torus_lattice(r, r)


def chekanov_descriptor(r: Any) -> TorusDescriptor:
    """Monotone with factor pi r^2 / 2; basis (loop around the (x, y) circle, theta-loop)."""
    R = _exact_length(r)
    if not float(R) > 0:
        raise NonPositiveRadius(f"radius must be positive, got {r}")
    w = PiMultiple(R * R) if isinstance(R, Fraction) else math.pi * float(R) ** 2
    return TorusDescriptor(H1LatticeData((2, 0), (w, 0 * w), f"chekanov({r})"), "chekanov", label=f"chekanov:{r}")


# ---------------------------------------------------------------------------
# verdicts

CITATIONS: dict[str, str] = {
    "clifford-pairs-unlink": "any two Clifford tori are smoothly unlinked",
    "equal-level-monotone-unlink": "monotone tori of equal A2 are smoothly unlinked",
    "two-unit-counts-trivialize-pi1": "a monotone L1 with two Maslov-2 classes of count 1 spanning H1 (over Q), and A2(L2) >= A2(L1), has trivial pi1 image in the complement of L2",
    "pi1-image-criterion": "a monotone L1 with A2(L2) >= A2(L1) is smoothly unlinked from L2 exactly when pi1(L1) -> pi1(R^4 - L2) is trivial",
    "monotone-bounds-solid-torus": "a monotone L1 with A2(L2) >= A2(L1) bounds a solid torus in the complement of L2",
    "admissible-homological-unlink": "an admissible L1 with A2(L2) >= A2(L1) is null-homologous in the complement of L2",
    "no-applicable-theorem": "no theorem applies; pairs with A2(L2) < A2(L1) can be homologically linked",
}

VERDICTS = ("smoothly_unlinked", "bounds_solid_torus_in_complement", "homologically_unlinked", "needs_pi1_input", "no_conclusion")


@dataclass(frozen=True)
class Verdict:
    verdict: str
    rule: str
    conclusions: frozenset[str]
    citations: tuple[str, ...]

    def as_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "rule": self.rule,
            "conclusions": sorted(self.conclusions),
            "citations": [{"id": c, "statement": CITATIONS[c]} for c in self.citations],
        }


def _unit_count_basis(d: TorusDescriptor) -> bool:
    if not d.enumerative:
        return False
    ones = [c for c, n in d.enumerative.items() if n == 1 and d.lattice.maslov(c) == 2]
    for i in range(len(ones)):
        for j in range(i + 1, len(ones)):
            a, b = ones[i], ones[j]
            if a[0] * b[1] - a[1] * b[0] != 0:
                return True
    return False


def unlinking_verdict(L1: TorusDescriptor, L2: TorusDescriptor, pi1_image_trivial: bool | None = None) -> Verdict:
    """First matching row of the decision table wins (rows a-f)."""
    A1, A2 = L1.a2, L2.a2
    m1 = L1.monotone_factor is not None
    m2 = L2.monotone_factor is not None
    geq = compare(A2, A1) >= 0
    if pi1_image_trivial is None and L1.pi1_image_generator is not None:
        pi1_image_trivial = L1.pi1_image_generator == 0

    both_ways = frozenset({"smoothly_unlinked", "homologically_unlinked"})
    if L1.kind == "clifford" and L2.kind == "clifford":
        extra = {"bounds_solid_torus_in_complement"} if geq else set()
        return Verdict("smoothly_unlinked", "a", both_ways | extra, ("clifford-pairs-unlink",))
    if m1 and m2 and compare(A1, A2) == 0:
        return Verdict(
            "smoothly_unlinked",
            "b",
            both_ways | {"bounds_solid_torus_in_complement"},
            ("equal-level-monotone-unlink",),
        )
    if m1 and geq and _unit_count_basis(L1):
        return Verdict(
            "smoothly_unlinked",
            "c",
            both_ways | {"bounds_solid_torus_in_complement", "pi1_image_trivial"},
            ("two-unit-counts-trivialize-pi1", "pi1-image-criterion", "monotone-bounds-solid-torus"),
        )
    if m1 and geq:
        base = {"bounds_solid_torus_in_complement", "homologically_unlinked"}
        cites = ("monotone-bounds-solid-torus", "pi1-image-criterion")
        if pi1_image_trivial is None:
            return Verdict("needs_pi1_input", "d", frozenset(base), cites)
        if pi1_image_trivial:
            return Verdict("smoothly_unlinked", "d", frozenset(base | {"smoothly_unlinked", "pi1_image_trivial"}), cites)
        return Verdict("bounds_solid_torus_in_complement", "d", frozenset(base | {"smoothly_linked"}), cites)
    if L1.admissible and not m1 and geq:
        return Verdict("homologically_unlinked", "e", frozenset({"homologically_unlinked"}), ("admissible-homological-unlink",))
    return Verdict("no_conclusion", "f", frozenset(), ("no-applicable-theorem",))


def level_partition(tori: Sequence[TorusDescriptor]) -> list[list[int]]:
    """Indices grouped by equal A2, levels in decreasing A2 order."""
    if not tori:
        return []
    for k, d in enumerate(tori):
        if d.monotone_factor is None:
            raise NonMonotoneInput(f"torus {k} is not monotone")
    vals = [d.a2 for d in tori]
    order = sorted(range(len(tori)), key=lambda k: float(vals[k]), reverse=True)
    levels: list[list[int]] = [[order[0]]]
    for k in order[1:]:
        if compare(vals[levels[-1][0]], vals[k]) == 0:
            levels[-1].append(k)
        else:
            levels.append([k])
    return [sorted(lv) for lv in levels]


# ---------------------------------------------------------------------------
# capacity


def _length_sq_area(x: Fraction | float) -> Area:
    if isinstance(x, Fraction):
        return PiMultiple(x * x)
    return math.pi * x * x


def capacity_polydisk(a: Any, b: Any) -> Area:
    """pi min(a, b)^2; b may be ``math.inf`` for the cylinder."""
    A, B = _exact_length(a), _exact_length(b)
    if not (float(A) > 0 and float(B) > 0):
        raise NonPositive(f"polydisk radii must be positive, got {a}, {b}")
    lo = A if float(A) <= float(B) else B
    return _length_sq_area(lo)


@dataclass(frozen=True)
class Obstruction:
    obstructed: bool
    reason: str
    a2: Area
    capacity: Area


def embedding_obstruction(r: Any, s: Any, a: Any, b: Any) -> Obstruction:
    """Whether the product torus L(r, s) provably cannot be moved into P(a, b)
    by a Hamiltonian isotopy: s >= sqrt(2) r and r > a."""
    R, S, A, B = (_exact_length(v) for v in (r, s, a, b))
    if not (0 < float(R) <= float(S)) or not (0 < float(A) <= float(B)):
        raise OrderViolation(f"need 0 < r <= s and 0 < a <= b, got r={r}, s={s}, a={a}, b={b}")
    if all(isinstance(v, Fraction) for v in (R, S)):
        wide = S * S >= 2 * R * R
    else:
        wide = float(S) ** 2 >= 2.0 * float(R) ** 2 * (1.0 - REL_TOL)
    if all(isinstance(v, Fraction) for v in (R, A)):
        big = R > A
    else:
        big = float(R) > float(A) and not abs(float(R) - float(A)) <= REL_TOL * float(R)
    a2_val = a2(product_torus_lattice(r, s).lattice)
    cap = capacity_polydisk(a, b)
    if wide and big:
        reason = f"A2 = {area_text(a2_val)} exceeds the polydisk capacity {area_text(cap)}"
    elif not wide and compare(a2_val, cap) > 0:
        reason = f"s/r below sqrt(2), outside this criterion, though A2 = {area_text(a2_val)} exceeds the capacity {area_text(cap)}"
    elif not wide:
        reason = "s/r below sqrt(2): A2 is not pi r^2 and no obstruction follows"
    else:
        reason = "r <= a: the torus fits inside the capacity bound"
    return Obstruction(bool(wide and big), reason, a2_val, cap)
