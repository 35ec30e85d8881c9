"""Symbolic finitary point sets over the line of natural numbers.

A point is a flat tuple whose components are labels (``int``) or finite
subsets of labels (:class:`Subset`, used by finite powersets).  Points of
different *shape* (the sequence of component kinds) never coincide, so sets
of different arity are disjoint by construction.

Infinite atoms are eventually periodic subsets of the line (finite edits of
arithmetic progressions); every expression built from them therefore has a
closed-form counting function, computed in :mod:`numeros.census`.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
import typing
from typing import Iterable, Iterator, Mapping

from .errors import ArityMismatch, MalformedAtom

Label = int


@dataclass(frozen=True, order=True)
class Subset:
    """A finite set of labels used as one point component."""

    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        els = self.elements
        if any(not isinstance(x, int) or isinstance(x, bool) or x < 0 for x in els):
            raise MalformedAtom(f"subset components must be natural numbers: {els!r}")
        if any(a >= b for a, b in zip(els, els[1:])):
            raise MalformedAtom(f"subset elements must be strictly increasing: {els!r}")

    @classmethod
    def of(cls, labels: Iterable[int]) -> "Subset":
        return cls(tuple(sorted(set(labels))))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __repr__(self) -> str:
        return "[" + ",".join(map(str, self.elements)) + "]"


Component = typing.Union[int, Subset]
Point = tuple  # tuple[Component, ...]
Shape = tuple  # tuple[str, ...], 'i' for a label, 'p' for a Subset


def _is_label(x: object) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and x >= 0


def make_point(*components: Component) -> Point:
    if not components:
        raise MalformedAtom("a point needs at least one component")
    for c in components:
        if not (_is_label(c) or isinstance(c, Subset)):
            raise MalformedAtom(f"invalid point component {c!r}")
    return tuple(components)


def pow_point(*labels: int) -> Point:
    """The one-component point standing for the finite subset ``labels``."""
    return (Subset.of(labels),)


def shape_of(p: Point) -> Shape:
    return tuple("p" if isinstance(c, Subset) else "i" for c in p)


def point_key(p: Point) -> tuple:
    """Total order on points of any shape (used for canonical output)."""
    return tuple((1, c.elements) if isinstance(c, Subset) else (0, c) for c in p)


def _point_labels(p: Point) -> Iterator[int]:
    for c in p:
        if isinstance(c, Subset):
            yield from c.elements
        else:
            yield c


# --------------------------------------------------------------------------
# Index: a finite subset of the line, stored as [0, prefix) plus extras.


@dataclass(frozen=True)
class Index:
    """Finite set of labels, stored compactly as ``[0, prefix) ∪ extra``.

    ``extra`` only holds labels greater than ``prefix``; the constructor
    helpers normalise so that equal sets compare equal.
    """

    prefix: int = 0
    extra: frozenset = frozenset()

    def __post_init__(self) -> None:
        if self.prefix < 0:
            raise ValueError("prefix must be nonnegative")
        if self.prefix in self.extra or any(x < self.prefix for x in self.extra):
            raise ValueError("Index not normalised; use Index.of/Index.below")

    @classmethod
    def _make(cls, prefix: int, extra: Iterable[int]) -> "Index":
        rest = {x for x in extra if x >= prefix}
        while prefix in rest:
            rest.discard(prefix)
            prefix += 1
        return cls(prefix, frozenset(rest))

    @classmethod
    def of(cls, labels: Iterable[int] = ()) -> "Index":
        labels = set(labels)
        for x in labels:
            if not _is_label(x):
                raise MalformedAtom(f"index labels must be natural numbers: {x!r}")
        return cls._make(0, labels)

    @classmethod
    def below(cls, n: int) -> "Index":
        """The initial segment ``[0, n)``."""
        return cls(max(n, 0), frozenset())

    def __contains__(self, x: object) -> bool:
        return isinstance(x, int) and (0 <= x < self.prefix or x in self.extra)

    def __len__(self) -> int:
        return self.prefix + len(self.extra)

    def __iter__(self) -> Iterator[int]:
        yield from range(self.prefix)
        yield from sorted(self.extra)

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(self)

    @property
    def max_label(self) -> int:
        """Largest label, or -1 for the empty index."""
        if self.extra:
            return max(self.extra)
        return self.prefix - 1

    def issubset(self, other: "Index") -> bool:
        if self.prefix > other.prefix:
            if any(x not in other.extra for x in range(other.prefix, self.prefix)):
                return False
        return all(x in other for x in self.extra)

    def __le__(self, other: "Index") -> bool:
        return self.issubset(other)

    def __lt__(self, other: "Index") -> bool:
        return self.issubset(other) and len(self) < len(other)

    def union(self, labels: Iterable[int]) -> "Index":
        if isinstance(labels, Index):
            prefix = max(self.prefix, labels.prefix)
            return Index._make(prefix, set(self.extra) | set(labels.extra)
                               | set(range(min(self.prefix, labels.prefix), prefix)))
        return Index._make(self.prefix, set(self.extra) | set(labels))

    def __repr__(self) -> str:
        if self.prefix <= 6:
            body = ",".join(map(str, self))
        else:
            body = f"0..{self.prefix - 1}" + "".join(f",{x}" for x in sorted(self.extra))
        return "{" + body + "}"


def support_of(p: Point) -> Index:
    """Set of labels occurring in ``p`` (a subset component supports itself)."""
    return Index.of(_point_labels(p))


# --------------------------------------------------------------------------
# Eventually periodic label sets.


def _divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


@dataclass(frozen=True)
class Periodic:
    """``{x < threshold : x in head} ∪ {x >= threshold : x % period in residues}``.

    Always built through :meth:`build`, which puts the set in canonical form
    (least period, then least threshold), so structural equality is equality
    of denotations.
    """

    period: int
    residues: frozenset
    threshold: int
    head: frozenset
    _head_sorted: tuple = field(default=(), compare=False, repr=False)
    _res_sorted: tuple = field(default=(), compare=False, repr=False)

    @classmethod
    def build(cls, period: int, residues: Iterable[int], threshold: int,
              head: Iterable[int]) -> "Periodic":
        residues = {r % period for r in residues}
        head = {x for x in head if 0 <= x < threshold}
        for d in _divisors(period):
            if all((r in residues) == ((r % d) in residues) for r in range(period)):
                residues = {r for r in residues if r < d}
                period = d
                break
        while threshold > 0:
            x = threshold - 1
            if (x in head) != ((x % period) in residues):
                break
            head.discard(x)
            threshold = x
        hs, rs = tuple(sorted(head)), tuple(sorted(residues))
        return cls(period, frozenset(residues), threshold, frozenset(head), hs, rs)

    @classmethod
    def finite(cls, labels: Iterable[int]) -> "Periodic":
        labels = set(labels)
        return cls.build(1, (), max(labels, default=-1) + 1, labels)

    @classmethod
    def progression(cls, modulus: int, residue: int, start: int = 0,
                    plus: Iterable[int] = (), minus: Iterable[int] = ()) -> "Periodic":
        plus, minus = set(plus), set(minus)
        threshold = max([start] + [x + 1 for x in plus | minus])

        def member(x: int) -> bool:
            if x in plus:
                return True
            return x >= start and x % modulus == residue and x not in minus

        return cls.build(modulus, {residue}, threshold,
                         [x for x in range(threshold) if member(x)])

    def __contains__(self, x: object) -> bool:
        if not _is_label(x):
            return False
        if x < self.threshold:
            return x in self.head
        return (x % self.period) in self.residues

    def is_empty(self) -> bool:
        return not self.residues and not self.head

    def is_finite(self) -> bool:
        return not self.residues

    def count_below(self, n: int) -> int:
        """``|self ∩ [0, n)|`` in time independent of ``n``."""
        if n <= self.threshold:
            return bisect.bisect_left(self._head_sorted, n)
        total = len(self.head)
        span = n - self.threshold
        full, rem = divmod(span, self.period)
        total += full * len(self.residues)
        base = self.threshold + full * self.period
        for r in self._res_sorted:
            # first x >= base with x % period == r
            x = base + ((r - base) % self.period)
            if x < n:
                total += 1
        return total

    def count_in(self, index: Index) -> int:
        return self.count_below(index.prefix) + sum(1 for x in index.extra if x in self)

    def elements_in(self, index: Index) -> list[int]:
        return [x for x in index if x in self]

    def _combine(self, other: "Periodic", op) -> "Periodic":
        period = self.period * other.period // math.gcd(self.period, other.period)
        threshold = max(self.threshold, other.threshold)
        residues = [r for r in range(period)
                    if op((r % self.period) in self.residues,
                          (r % other.period) in other.residues)]
        head = [x for x in range(threshold) if op(x in self, x in other)]
        return Periodic.build(period, residues, threshold, head)

    def __and__(self, other: "Periodic") -> "Periodic":
        return self._combine(other, lambda a, b: a and b)

    def __or__(self, other: "Periodic") -> "Periodic":
        return self._combine(other, lambda a, b: a or b)

    def __sub__(self, other: "Periodic") -> "Periodic":
        return self._combine(other, lambda a, b: a and not b)

    def relabel(self, relabeling: "FiniteRelabel") -> "Periodic":
        inverse = relabeling.inverse_map
        threshold = max(self.threshold, max(inverse, default=-1) + 1)
        head = [x for x in range(threshold) if inverse.get(x, x) in self]
        return Periodic.build(self.period, self.residues, threshold, head)


Periodic.EMPTY = Periodic.build(1, (), 0, ())


# --------------------------------------------------------------------------
# Congruences: support-preserving bijections of tuples.


@dataclass(frozen=True)
class ComponentPermutation:
    """Point ``p`` maps to ``q`` with ``q[j] = p[perm[j]]``."""

    perm: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.perm) != list(range(len(self.perm))) or not self.perm:
            raise MalformedAtom(f"not a permutation: {self.perm!r}")

    def apply(self, p: Point) -> Point:
        return tuple(p[k] for k in self.perm)

    def preimage(self, p: Point) -> Point:
        q = [None] * len(p)
        for j, k in enumerate(self.perm):
            q[k] = p[j]
        return tuple(q)

    def map_shape(self, s: Shape) -> Shape:
        return tuple(s[k] for k in self.perm)


@dataclass(frozen=True)
class Regroup:
    """Re-parenthesisation of a flat tuple into blocks; identity on flat points."""

    blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.blocks or any(b < 1 for b in self.blocks):
            raise MalformedAtom(f"regroup blocks must be positive: {self.blocks!r}")

    @property
    def arity(self) -> int:
        return sum(self.blocks)

    def apply(self, p: Point) -> Point:
        return p

    preimage = apply

    def map_shape(self, s: Shape) -> Shape:
        return s


@dataclass(frozen=True)
class FiniteRelabel:
    """A permutation of a finite set of labels, extended by the identity.

    The moved labels form the declared cone: every index containing them is
    mapped onto itself.
    """

    mapping: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        src = [a for a, _ in self.mapping]
        dst = [b for _, b in self.mapping]
        if not all(_is_label(x) for x in src + dst):
            raise MalformedAtom("relabel entries must be natural numbers")
        if len(set(src)) != len(src) or set(src) != set(dst):
            raise MalformedAtom(f"relabel must permute its domain: {self.mapping!r}")
        object.__setattr__(self, "mapping", tuple(sorted(self.mapping)))

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "FiniteRelabel":
        return cls(tuple(sorted(mapping.items())))

    @property
    def forward_map(self) -> dict[int, int]:
        return dict(self.mapping)

    @property
    def inverse_map(self) -> dict[int, int]:
        return {b: a for a, b in self.mapping}

    @property
    def domain(self) -> Index:
        return Index.of(a for a, _ in self.mapping)

    def _map(self, p: Point, table: dict[int, int]) -> Point:
        out = []
        for c in p:
            if isinstance(c, Subset):
                out.append(Subset.of(table.get(x, x) for x in c.elements))
            else:
                out.append(table.get(c, c))
        return tuple(out)

    def apply(self, p: Point) -> Point:
        return self._map(p, self.forward_map)

    def preimage(self, p: Point) -> Point:
        return self._map(p, self.inverse_map)

    def map_shape(self, s: Shape) -> Shape:
        return s

    def preimage_index(self, index: Index) -> Index:
        inverse = self.inverse_map
        moved = set(inverse)
        labels = set(index) - moved
        labels |= {inverse[x] for x in moved if x in index}
        return Index.of(labels)


CongruenceSpec = typing.Union[ComponentPermutation, Regroup, FiniteRelabel]


# --------------------------------------------------------------------------
# Expression nodes.


class SetExpr:
    """Base of the immutable expression tree."""

    __slots__ = ()

    def __or__(self, other: "SetExpr") -> "SetExpr":
        return union(self, other)

    def __and__(self, other: "SetExpr") -> "SetExpr":
        return intersect(self, other)

    def __sub__(self, other: "SetExpr") -> "SetExpr":
        return difference(self, other)

    def __mul__(self, other: "SetExpr") -> "SetExpr":
        return product(self, other)

    def __repr__(self) -> str:
        return to_source(self)


@dataclass(frozen=True, repr=False)
class Empty(SetExpr):
    pass


@dataclass(frozen=True, repr=False)
class Finite(SetExpr):
    points: frozenset


@dataclass(frozen=True, repr=False)
class Progression(SetExpr):
    modulus: int
    residue: int
    start: int = 0
    plus: frozenset = frozenset()
    minus: frozenset = frozenset()


@dataclass(frozen=True, repr=False)
class Union(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, repr=False)
class Intersect(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, repr=False)
class Difference(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, repr=False)
class Product(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, repr=False)
class Renamed(SetExpr):
    tau: CongruenceSpec
    inner: SetExpr


@dataclass(frozen=True, repr=False)
class FinPowerset(SetExpr):
    inner: SetExpr


@dataclass(frozen=True, repr=False, eq=False)
class Witness(SetExpr):
    """A subtraction witness; ``schedule`` owns the lazily generated points.

    Compared by identity: two witnesses are the same set only if they share
    a schedule.
    """

    schedule: object

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Witness) and other.schedule is self.schedule

    def __hash__(self) -> int:
        return id(self.schedule)


EMPTY = Empty()


# --------------------------------------------------------------------------
# Construction.


def build_atom(kind: str, **params) -> SetExpr:
    """Build a ``"finite"`` or ``"progression"`` atom from keyword parameters."""
    if kind == "finite":
        return finite(params.get("points", ()))
    if kind == "progression":
        return progression(**params)
    raise MalformedAtom(f"unknown atom kind {kind!r}")


def finite(points: Iterable) -> SetExpr:
    """Finite set of points; bare labels are read as 1-tuples."""
    pts = set()
    for p in points:
        if _is_label(p) or isinstance(p, Subset):
            p = (p,)
        if not isinstance(p, tuple):
            raise MalformedAtom(f"invalid point {p!r}")
        pts.add(make_point(*p))
    return Finite(frozenset(pts)) if pts else EMPTY


def progression(modulus: int, residue: int, start: int = 0,
                plus: Iterable[int] = (), minus: Iterable[int] = ()) -> SetExpr:
    plus, minus = frozenset(plus), frozenset(minus)
    if not (_is_label(modulus) and modulus >= 1):
        raise MalformedAtom(f"modulus must be >= 1, got {modulus!r}")
    if not (_is_label(residue) and residue < modulus):
        raise MalformedAtom(f"residue must satisfy 0 <= r < m, got {residue!r}")
    if not _is_label(start):
        raise MalformedAtom(f"start must be a natural number, got {start!r}")
    if not all(_is_label(x) for x in plus | minus):
        raise MalformedAtom("plus/minus labels must be natural numbers")
    if plus & minus:
        raise MalformedAtom(f"plus and minus overlap: {sorted(plus & minus)}")
    return Progression(modulus, residue, start, plus, minus)


def shapes(expr: SetExpr) -> frozenset:
    """The shapes of the points an expression may contain."""
    cached = expr.__dict__.get("_shapes")
    if cached is not None:
        return cached
    if isinstance(expr, Empty):
        out = frozenset()
    elif isinstance(expr, Finite):
        out = frozenset(shape_of(p) for p in expr.points)
    elif isinstance(expr, Progression):
        out = frozenset({("i",)})
    elif isinstance(expr, Union):
        out = shapes(expr.left) | shapes(expr.right)
    elif isinstance(expr, Intersect):
        out = shapes(expr.left) & shapes(expr.right)
    elif isinstance(expr, Difference):
        out = shapes(expr.left)
    elif isinstance(expr, Product):
        out = frozenset(a + b for a in shapes(expr.left) for b in shapes(expr.right))
    elif isinstance(expr, Renamed):
        out = frozenset(expr.tau.map_shape(s) for s in shapes(expr.inner))
    elif isinstance(expr, FinPowerset):
        out = frozenset({("p",)})
    elif isinstance(expr, Witness):
        out = frozenset({("i",) * expr.schedule.arity})
    else:
        raise TypeError(f"not a SetExpr: {expr!r}")
    expr.__dict__["_shapes"] = out
    return out


def arity(expr: SetExpr) -> int:
    """Maximum point length (0 for the empty set)."""
    return max((len(s) for s in shapes(expr)), default=0)


def combine(op: str, left: SetExpr, right: SetExpr) -> SetExpr:
    if op == "union":
        return union(left, right)
    if op == "intersect":
        return intersect(left, right)
    if op == "difference":
        return difference(left, right)
    if op == "product":
        return product(left, right)
    raise ValueError(f"unknown operation {op!r}")


def union(left: SetExpr, right: SetExpr) -> SetExpr:
    if isinstance(left, Empty):
        return right
    if isinstance(right, Empty):
        return left
    return Union(left, right)


def intersect(left: SetExpr, right: SetExpr) -> SetExpr:
    if not (shapes(left) & shapes(right)):
        return EMPTY
    return Intersect(left, right)


def difference(left: SetExpr, right: SetExpr) -> SetExpr:
    if isinstance(left, Empty):
        return EMPTY
    if not (shapes(left) & shapes(right)):
        return left
    return Difference(left, right)


def product(left: SetExpr, right: SetExpr) -> SetExpr:
    if isinstance(left, Empty) or isinstance(right, Empty):
        return EMPTY
    return Product(left, right)


def rename(tau: CongruenceSpec, a: SetExpr) -> SetExpr:
    """Image of ``a`` under a support-preserving congruence."""
    for s in shapes(a):
        if isinstance(tau, ComponentPermutation) and len(s) != len(tau.perm):
            raise ArityMismatch(f"permutation of length {len(tau.perm)} applied to arity {len(s)}")
        if isinstance(tau, Regroup) and len(s) != tau.arity:
            raise ArityMismatch(f"regroup of arity {tau.arity} applied to arity {len(s)}")
    if isinstance(a, Empty):
        return EMPTY
    return Renamed(tau, a)


def fin_powerset(x: SetExpr) -> SetExpr:
    """Set of finite subsets of ``x``; ``x`` must be a set of labels."""
    if any(s != ("i",) for s in shapes(x)):
        raise ArityMismatch("finite powerset needs a set of arity 1")
    return FinPowerset(x)


# --------------------------------------------------------------------------
# Membership and enumeration (structural; independent of the census algebra).


def contains(a: SetExpr, p: Point) -> bool:
    if not isinstance(p, tuple) or not p:
        return False
    if isinstance(a, Empty):
        return False
    if isinstance(a, Finite):
        return p in a.points
    if isinstance(a, Progression):
        if len(p) != 1 or not _is_label(p[0]):
            return False
        x = p[0]
        if x in a.plus:
            return True
        return x >= a.start and x % a.modulus == a.residue and x not in a.minus
    if isinstance(a, Union):
        return contains(a.left, p) or contains(a.right, p)
    if isinstance(a, Intersect):
        return contains(a.left, p) and contains(a.right, p)
    if isinstance(a, Difference):
        return contains(a.left, p) and not contains(a.right, p)
    if isinstance(a, Product):
        for k in sorted({len(s) for s in shapes(a.left)}):
            if k < len(p) and contains(a.left, p[:k]) and contains(a.right, p[k:]):
                return True
        return False
    if isinstance(a, Renamed):
        if isinstance(a.tau, ComponentPermutation) and len(p) != len(a.tau.perm):
            return False
        return contains(a.inner, a.tau.preimage(p))
    if isinstance(a, FinPowerset):
        if len(p) != 1 or not isinstance(p[0], Subset):
            return False
        return all(contains(a.inner, (x,)) for x in p[0].elements)
    if isinstance(a, Witness):
        return a.schedule.contains(p)
    raise TypeError(f"not a SetExpr: {a!r}")


def points_within(a: SetExpr, index: Index) -> frozenset:
    """All points of ``a`` whose support lies inside ``index``."""
    if isinstance(a, Empty):
        return frozenset()
    if isinstance(a, Finite):
        return frozenset(p for p in a.points if all(x in index for x in _point_labels(p)))
    if isinstance(a, Progression):
        return frozenset((x,) for x in index if contains(a, (x,)))
    if isinstance(a, Union):
        return points_within(a.left, index) | points_within(a.right, index)
    if isinstance(a, Intersect):
        return frozenset(p for p in points_within(a.left, index) if contains(a.right, p))
    if isinstance(a, Difference):
        return frozenset(p for p in points_within(a.left, index) if not contains(a.right, p))
    if isinstance(a, Product):
        left = points_within(a.left, index)
        if not left:
            return frozenset()
        right = points_within(a.right, index)
        return frozenset(l + r for l in left for r in right)
    if isinstance(a, Renamed):
        inner_index = index
        if isinstance(a.tau, FiniteRelabel):
            inner_index = a.tau.preimage_index(index)
        return frozenset(a.tau.apply(p) for p in points_within(a.inner, inner_index))
    if isinstance(a, FinPowerset):
        labels = sorted(p[0] for p in points_within(a.inner, index))
        return frozenset(
            (Subset(combo),)
            for k in range(len(labels) + 1)
            for combo in itertools.combinations(labels, k)
        )
    if isinstance(a, Witness):
        return a.schedule.points_within(index)
    raise TypeError(f"not a SetExpr: {a!r}")


def iter_points(a: SetExpr, limit: int | None = None) -> Iterator[Point]:
    """Enumerate points by the largest label they use, then canonically.

    Runs forever on infinite sets unless ``limit`` is given.
    """
    seen: frozenset = frozenset()
    emitted = 0
    c = 0
    while limit is None or emitted < limit:
        now = points_within(a, Index.below(c))
        for p in sorted(now - seen, key=point_key):
            yield p
            emitted += 1
            if limit is not None and emitted >= limit:
                return
        seen = now
        c += 1


def contains_witness(a: SetExpr) -> bool:
    if isinstance(a, Witness):
        return True
    for name in ("left", "right", "inner"):
        child = getattr(a, name, None)
        if child is not None and contains_witness(child):
            return True
    return False


# --------------------------------------------------------------------------
# Printing in the script notation.


def _fmt_labels(labels: Iterable[int]) -> str:
    return "{" + ",".join(map(str, sorted(labels))) + "}"


def _fmt_point(p: Point) -> str:
    parts = [repr(c) if isinstance(c, Subset) else str(c) for c in p]
    if len(parts) == 1:
        return parts[0]
    return "(" + ",".join(parts) + ")"


def tau_source(tau: CongruenceSpec) -> str:
    if isinstance(tau, ComponentPermutation):
        return "perm(" + ",".join(map(str, tau.perm)) + ")"
    if isinstance(tau, Regroup):
        return "regroup(" + ",".join(map(str, tau.blocks)) + ")"
    return "relabel(" + ",".join(f"{a}->{b}" for a, b in tau.mapping) + ")"


def to_source(a: SetExpr) -> str:
    """Render ``a`` in the script notation (fully parenthesised)."""
    if isinstance(a, Empty):
        return "{}"
    if isinstance(a, Finite):
        return "{" + ",".join(_fmt_point(p) for p in sorted(a.points, key=point_key)) + "}"
    if isinstance(a, Progression):
        out = f"prog({a.modulus},{a.residue}"
        if a.start:
            out += f",start={a.start}"
        if a.plus:
            out += f",plus={_fmt_labels(a.plus)}"
        if a.minus:
            out += f",minus={_fmt_labels(a.minus)}"
        return out + ")"
    ops = {Union: "|", Intersect: "&", Difference: "\\", Product: "x"}
    for cls, sym in ops.items():
        if isinstance(a, cls):
            return f"({to_source(a.left)} {sym} {to_source(a.right)})"
    if isinstance(a, Renamed):
        return f"rename({tau_source(a.tau)},{to_source(a.inner)})"
    if isinstance(a, FinPowerset):
        return f"pow<ω({to_source(a.inner)})"
    if isinstance(a, Witness):
        return f"witness#{a.schedule.serial}"
    raise TypeError(f"not a SetExpr: {a!r}")
