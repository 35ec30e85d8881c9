"""Counting functions ``i ↦ |A_i|`` of point sets and their closed forms.

Every witness-free expression is rewritten once into a signed sum of
*product terms*: tuples of factors, each an eventually periodic label set,
a finite powerset of one, or a finite family of subsets.  Intersections of
terms are computed factorwise (periodic sets intersect on the lcm of their
periods), so unions and differences become inclusion-exclusion over terms.
The census at an index is then a sum of products of per-factor counts, and
along the chain ``[0, n)`` each residue class of ``n`` yields an
exponential polynomial (see :class:`~numeros.expoly.ExpPoly`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import UnsupportedExpression
from .expoly import ExpPoly, _padd, _pmul
from .pointset import (
    ComponentPermutation,
    Difference,
    Empty,
    FinPowerset,
    Finite,
    FiniteRelabel,
    Index,
    Intersect,
    Periodic,
    Product,
    Progression,
    Regroup,
    Renamed,
    SetExpr,
    Subset,
    Union,
    Witness,
    contains_witness,
    finite,
    points_within,
    support_of,
)


class NoClosedForm(Exception):
    """Internal: the expression mixes a witness with a same-shaped set."""


@dataclass(frozen=True)
class PowFactor:
    base: Periodic


@dataclass(frozen=True)
class SubsetsFactor:
    members: frozenset  # of Subset


@dataclass(frozen=True, eq=False)
class WitnessFactor:
    schedule: object

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WitnessFactor) and other.schedule is self.schedule

    def __hash__(self) -> int:
        return id(self.schedule)


def _width(f) -> int:
    return f.schedule.arity if isinstance(f, WitnessFactor) else 1


def _term_shape(term: tuple) -> tuple:
    out: list[str] = []
    for f in term:
        if isinstance(f, Periodic):
            out.append("i")
        elif isinstance(f, WitnessFactor):
            out.extend("i" * f.schedule.arity)
        else:
            out.append("p")
    return tuple(out)


def _meet_factor(f, g):
    if isinstance(f, Periodic) and isinstance(g, Periodic):
        m = f & g
        return None if m.is_empty() else m
    if isinstance(f, PowFactor) and isinstance(g, PowFactor):
        return PowFactor(f.base & g.base)
    if isinstance(f, SubsetsFactor) or isinstance(g, SubsetsFactor):
        if isinstance(f, PowFactor):
            f, g = g, f
        if isinstance(g, PowFactor):
            keep = frozenset(s for s in f.members if all(x in g.base for x in s.elements))
        else:
            keep = f.members & g.members
        return SubsetsFactor(keep) if keep else None
    if isinstance(f, WitnessFactor) and f == g:
        return f
    raise NoClosedForm


def _meet(t1: tuple, t2: tuple) -> tuple | None:
    if _term_shape(t1) != _term_shape(t2):
        return None
    if [_width(f) for f in t1] != [_width(f) for f in t2]:
        raise NoClosedForm
    out = []
    for f, g in zip(t1, t2):
        m = _meet_factor(f, g)
        if m is None:
            return None
        out.append(m)
    return tuple(out)


def _accumulate(acc: dict, terms: Mapping, scale: int = 1) -> None:
    for t, c in terms.items():
        v = acc.get(t, 0) + scale * c
        if v:
            acc[t] = v
        else:
            acc.pop(t, None)


def _meet_all(a: Mapping, b: Mapping) -> dict:
    out: dict = {}
    for t1, c1 in a.items():
        for t2, c2 in b.items():
            m = _meet(t1, t2)
            if m is not None:
                _accumulate(out, {m: c1 * c2})
    return out


def _map_factor(f, tau: FiniteRelabel):
    if isinstance(f, Periodic):
        return f.relabel(tau)
    if isinstance(f, PowFactor):
        return PowFactor(f.base.relabel(tau))
    if isinstance(f, SubsetsFactor):
        return SubsetsFactor(frozenset(tau.apply((s,))[0] for s in f.members))
    raise NoClosedForm


def terms_of(a: SetExpr) -> dict:
    """Signed product-term decomposition of the indicator of ``a``.

    Raises :class:`NoClosedForm` when a witness meets a set of its own shape.
    """
    cached = a.__dict__.get("_terms")
    if cached is not None:
        if cached is NoClosedForm:
            raise NoClosedForm
        return cached
    try:
        out = _terms_of(a)
    except NoClosedForm:
        a.__dict__["_terms"] = NoClosedForm
        raise
    a.__dict__["_terms"] = out
    return out


def _terms_of(a: SetExpr) -> dict:
    if isinstance(a, Empty):
        return {}
    if isinstance(a, Finite):
        out: dict = {}
        labels = [p[0] for p in a.points if len(p) == 1 and isinstance(p[0], int)]
        if labels:
            out[(Periodic.finite(labels),)] = 1
        for p in a.points:
            if len(p) == 1 and isinstance(p[0], int):
                continue
            term = tuple(
                SubsetsFactor(frozenset({c})) if isinstance(c, Subset) else Periodic.finite({c})
                for c in p
            )
            out[term] = 1
        return out
    if isinstance(a, Progression):
        return {(Periodic.progression(a.modulus, a.residue, a.start, a.plus, a.minus),): 1}
    if isinstance(a, Union):
        left, right = terms_of(a.left), terms_of(a.right)
        out = dict(left)
        _accumulate(out, right)
        _accumulate(out, _meet_all(left, right), -1)
        return out
    if isinstance(a, Intersect):
        return _meet_all(terms_of(a.left), terms_of(a.right))
    if isinstance(a, Difference):
        left = terms_of(a.left)
        out = dict(left)
        _accumulate(out, _meet_all(left, terms_of(a.right)), -1)
        return out
    if isinstance(a, Product):
        out = {}
        for t1, c1 in terms_of(a.left).items():
            for t2, c2 in terms_of(a.right).items():
                _accumulate(out, {t1 + t2: c1 * c2})
        return out
    if isinstance(a, Renamed):
        inner = terms_of(a.inner)
        tau = a.tau
        if isinstance(tau, Regroup):
            return dict(inner)
        out = {}
        for t, c in inner.items():
            if isinstance(tau, ComponentPermutation):
                if any(_width(f) != 1 for f in t):
                    raise NoClosedForm
                nt = tuple(t[k] for k in tau.perm)
            else:
                nt = tuple(_map_factor(f, tau) for f in t)
            _accumulate(out, {nt: c})
        return out
    if isinstance(a, FinPowerset):
        return {(PowFactor(as_periodic(a.inner)),): 1}
    if isinstance(a, Witness):
        return {(WitnessFactor(a.schedule),): 1}
    raise TypeError(f"not a SetExpr: {a!r}")


def as_periodic(a: SetExpr) -> Periodic:
    """The denotation of a witness-free arity-1 expression as a label set."""
    terms = terms_of(a)
    if not terms:
        return Periodic.EMPTY
    sets = []
    for t, c in terms.items():
        if len(t) != 1 or not isinstance(t[0], Periodic):
            raise UnsupportedExpression("expected a set of labels")
        sets.append((t[0], c))
    period = math.lcm(*(s.period for s, _ in sets))
    threshold = max(s.threshold for s, _ in sets)

    def weight(x: int) -> int:
        return sum(c for s, c in sets if x in s)

    residues = [r for r in range(period)
                if sum(c for s, c in sets if (r % s.period) in s.residues) == 1]
    head = [x for x in range(threshold) if weight(x) == 1]
    return Periodic.build(period, residues, threshold, head)


# --------------------------------------------------------------------------
# Census at an index.


def _factor_count(f, index: Index) -> int:
    if isinstance(f, Periodic):
        return f.count_in(index)
    if isinstance(f, PowFactor):
        return 2 ** f.base.count_in(index)
    if isinstance(f, SubsetsFactor):
        return sum(1 for s in f.members if all(x in index for x in s.elements))
    return f.schedule.census(index)


def census_at(a: SetExpr, index: Index) -> int:
    """``|A_i|``: the number of points of ``a`` with support inside ``index``."""
    if not isinstance(index, Index):
        index = Index.of(index)
    try:
        terms = terms_of(a)
    except NoClosedForm:
        return len(points_within(a, index))
    total = 0
    for term, c in terms.items():
        prod = c
        for f in term:
            prod *= _factor_count(f, index)
            if not prod:
                break
        total += prod
    return total


def exact_support_count(a: SetExpr, index: Index) -> int:
    """Points of ``a`` whose support is exactly ``index``, by Möbius inversion."""
    if not isinstance(index, Index):
        index = Index.of(index)
    labels = index.elements
    n = len(labels)
    total = 0
    for k in range(n + 1):
        sign = -1 if (n - k) % 2 else 1
        for sub in itertools.combinations(labels, k):
            total += sign * census_at(a, Index.of(sub))
    return total


# --------------------------------------------------------------------------
# Closed-form profiles along the chain [0, n).


@dataclass(frozen=True)
class CensusProfile:
    """Closed form of ``n ↦ |A_[0,n) ∪ forced|`` for ``n >= valid_from``.

    ``per_residue[r]`` is an exponential polynomial in ``t`` where
    ``n = period*t + r``; ``None`` marks residue classes where the profile is
    undefined (only for witness-bearing chain profiles).  Forced labels are
    absorbed because ``valid_from`` exceeds all of them.  A difference of
    two profiles is again a profile (the signed "delta profile").
    """

    period: int
    per_residue: tuple
    valid_from: int
    forced: frozenset = frozenset()

    def value(self, n: int) -> Fraction:
        """The formula at ``n``, exact as a rational even below ``valid_from``."""
        r = n % self.period
        f = self.per_residue[r]
        if f is None:
            raise ValueError(f"profile undefined on residue {r} mod {self.period}")
        return f((n - r) // self.period)

    def at(self, n: int) -> int:
        v = self.value(n)
        if v.denominator != 1:
            raise ArithmeticError("non-integral census value")
        return int(v)

    __call__ = at

    def at_period(self, period: int) -> "CensusProfile":
        if period == self.period:
            return self
        if period % self.period:
            raise ValueError("new period must be a multiple of the old one")
        k = period // self.period
        out = []
        for r in range(period):
            r0 = r % self.period
            f = self.per_residue[r0]
            out.append(None if f is None else f.affine(k, (r - r0) // self.period))
        return CensusProfile(period, tuple(out), self.valid_from, self.forced)

    def _binary(self, other: "CensusProfile", op) -> "CensusProfile":
        period = math.lcm(self.period, other.period)
        a, b = self.at_period(period), other.at_period(period)
        out = tuple(None if f is None or g is None else op(f, g)
                    for f, g in zip(a.per_residue, b.per_residue))
        return CensusProfile(period, out, max(self.valid_from, other.valid_from),
                             self.forced | other.forced)

    def __add__(self, other: "CensusProfile") -> "CensusProfile":
        return self._binary(other, lambda f, g: f + g)

    def __sub__(self, other: "CensusProfile") -> "CensusProfile":
        return self._binary(other, lambda f, g: f - g)

    def __mul__(self, other: "CensusProfile") -> "CensusProfile":
        return self._binary(other, lambda f, g: f * g)

    def is_zero(self) -> bool:
        return all(f is not None and f.is_zero() for f in self.per_residue)

    def eventual_constant(self) -> int | None:
        """The eventual value if it is the same constant on every residue."""
        values = set()
        for f in self.per_residue:
            if f is None:
                return None
            v = f.constant_value()
            if v is None:
                return None
            values.add(v)
        if len(values) != 1:
            return None
        v = values.pop()
        return int(v) if v.denominator == 1 else None

    def max_degree(self) -> int:
        return max((len(p) - 1 for f in self.per_residue if f is not None
                    for _, p in f.terms), default=0)

    def polynomial_in_n(self, residue: int) -> tuple[Fraction, ...]:
        """Coefficients (low degree first) of the residue's polynomial in ``n``.

        Only defined when the residue carries no exponential part.
        """
        f = self.per_residue[residue]
        if f is None or any(b != 1 for b, _ in f.terms):
            raise ValueError("not a polynomial on this residue")
        # t = (n - r)/P
        p = f.terms[0][1] if f.terms else ()
        acc: tuple = ()
        lin = (Fraction(-residue, self.period), Fraction(1, self.period))
        for a in reversed(p):
            acc = _padd(_pmul(acc, lin), (a,))
        return acc

    def describe(self) -> str:
        parts = [f"n≡{r} (mod {self.period}): {f!r}" for r, f in enumerate(self.per_residue)]
        return f"from n={self.valid_from}; t=(n-r)/{self.period}; " + "; ".join(parts)


def _factor_period(f) -> int:
    if isinstance(f, Periodic):
        return f.period
    if isinstance(f, PowFactor):
        return f.base.period
    if isinstance(f, SubsetsFactor):
        return 1
    return f.schedule.chain_profile().period


def _factor_threshold(f) -> int:
    if isinstance(f, Periodic):
        return f.threshold
    if isinstance(f, PowFactor):
        return f.base.threshold
    if isinstance(f, SubsetsFactor):
        return max((x + 1 for s in f.members for x in s.elements), default=0)
    return f.schedule.chain_profile().valid_from


def _factor_expoly(f, period: int, r: int, t0: int) -> ExpPoly | None:
    if isinstance(f, (Periodic, PowFactor)):
        s = f if isinstance(f, Periodic) else f.base
        slope = (period // s.period) * len(s.residues)
        offset = s.count_below(period * t0 + r) - slope * t0
        if isinstance(f, Periodic):
            return ExpPoly.linear(slope, offset)
        return ExpPoly({2 ** slope: (Fraction(2) ** offset,)})
    if isinstance(f, SubsetsFactor):
        return ExpPoly.const(len(f.members))
    prof = f.schedule.chain_profile().at_period(period)
    return prof.per_residue[r]


def _profile_from_terms(terms: Mapping, forced: frozenset) -> CensusProfile:
    factors = [f for t in terms for f in t]
    period = math.lcm(1, *(_factor_period(f) for f in factors))
    start = max([0] + [_factor_threshold(f) for f in factors] + [x + 1 for x in forced])
    per_residue = []
    for r in range(period):
        t0 = max(0, -(-(start - r) // period))
        total = ExpPoly()
        for term, c in terms.items():
            prod = ExpPoly.const(c)
            for f in term:
                e = _factor_expoly(f, period, r, t0)
                if e is None:
                    prod = None
                    break
                prod = prod * e
            if prod is None:
                total = None
                break
            total = total + prod
        per_residue.append(total)
    return CensusProfile(period, tuple(per_residue), start, frozenset(forced))


def census_profile(a: SetExpr, forced: Iterable[int] = ()) -> CensusProfile:
    """Closed form of ``n ↦ census_at(a, [0,n) ∪ forced)``.

    ``valid_from`` is the least stage from which the formula is exact.
    """
    if contains_witness(a):
        raise UnsupportedExpression("census profiles are not defined for witness sets")
    forced = frozenset(forced)
    prof = _profile_from_terms(terms_of(a), forced)
    n = prof.valid_from
    while n > 0:
        m = n - 1
        if prof.value(m) != census_at(a, Index.below(m).union(forced)):
            break
        n = m
    return CensusProfile(prof.period, prof.per_residue, n, forced)


def chain_profile(a: SetExpr) -> CensusProfile:
    """Profile valid at chain stages; witnesses contribute their schedule.

    Raises :class:`NoClosedForm` outside the closed-form fragment.
    """
    cached = a.__dict__.get("_chain_profile")
    if cached is None:
        cached = _profile_from_terms(terms_of(a), frozenset())
        a.__dict__["_chain_profile"] = cached
    return cached


def delta_profile(a: SetExpr, b: SetExpr) -> CensusProfile:
    """Signed profile of ``|B_i| - |A_i|`` along the chain."""
    return chain_profile(b) - chain_profile(a)


def is_empty(a: SetExpr) -> bool:
    """Exact emptiness: the census is monotone, so an eventually-zero
    profile means no point is ever counted."""
    terms = terms_of(a)
    return not terms or chain_profile(a).is_zero()


# --------------------------------------------------------------------------
# Realising arbitrary integer differences of counting functions.


def _colex_subsets(ground: list[int]) -> Iterator[frozenset]:
    for mask in range(1, 1 << len(ground)):
        yield frozenset(x for k, x in enumerate(ground) if mask >> k & 1)


def _exact_support_points(i: frozenset) -> Iterator[tuple]:
    labels = sorted(i)
    for n in itertools.count(max(len(labels), 1)):
        for tup in itertools.product(labels, repeat=n):
            if set(tup) == i:
                yield tup


def solve_counting_difference(
    targets: Mapping[frozenset, int], ground: Iterable[int]
) -> tuple[SetExpr, SetExpr]:
    """Finite ``A, B`` with ``|A_i| - |B_i| = targets[i]`` for every nonempty
    ``i ⊆ ground`` (missing targets count as 0).

    Indices are processed in colex order, so every proper subset of ``i`` is
    settled before ``i``; points added at ``i`` have support exactly ``i`` and
    therefore leave all earlier differences untouched.
    """
    ground = sorted(set(ground))
    targets = {frozenset(k): v for k, v in targets.items()}
    a_pts: list[tuple] = []
    b_pts: list[tuple] = []
    for i in _colex_subsets(ground):
        current = sum(1 for p in a_pts if set(p) <= i) - sum(1 for p in b_pts if set(p) <= i)
        need = targets.get(i, 0) - current
        dest = a_pts if need > 0 else b_pts
        dest.extend(itertools.islice(_exact_support_points(i), abs(need)))
    return finite(a_pts), finite(b_pts)


__all__ = [
    "CensusProfile",
    "ExpPoly",
    "NoClosedForm",
    "as_periodic",
    "census_at",
    "census_profile",
    "chain_profile",
    "delta_profile",
    "exact_support_count",
    "is_empty",
    "solve_counting_difference",
    "support_of",
    "terms_of",
]
