"""Numerosities: sizes of point sets modulo the oracle's equivalence.

Sums use disjoint copies, products use Cartesian products, and comparison
delegates to the oracle.  :meth:`Numerosities.sub_witness` builds the set
``C`` of the subtraction principle explicitly: a lazily generated set of
fresh tuples whose census along the chain is ``|B_i| - |A_i|``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .census import (
    CensusProfile,
    NoClosedForm,
    census_at,
    chain_profile,
    is_empty,
)
from .errors import (
    CapacityExceeded,
    NotLess,
    UnsupportedExpression,
)
from .oracle import OracleState, Ordering
from .pointset import (
    EMPTY,
    ComponentPermutation,
    FiniteRelabel,
    Index,
    Point,
    SetExpr,
    Witness,
    contains,
    contains_witness,
    difference,
    finite,
    intersect,
    iter_points,
    product,
    rename,
    shapes,
    to_source,
    union,
)


class _NotFinite:
    """The value returned by :meth:`Numerosities.to_natural` for infinite sizes."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NotFinite"

    def __bool__(self) -> bool:
        return False


NotFinite = _NotFinite()


# --------------------------------------------------------------------------
# Subtraction witnesses.


class WitnessSchedule:
    """Points of a subtraction witness ``C`` for ``a < b``, stage by stage.

    Points are ``q``-tuples of labels with ``q`` one more than the longest
    point of ``a`` or ``b``, so ``C`` is disjoint from both by shape.  The
    batch for the start stage ``k0`` takes the first ``δ(c_k0)`` tuples of
    ``[0, c_k0)^q`` in lexicographic order; the batch for a later stage ``k``
    takes ``Δ_k = δ(c_k) - δ(c_{k-1})`` tuples whose first component is a new
    label in ``[c_{k-1}, c_k)`` and whose other components lie in
    ``[0, c_k)``.  Here ``δ(n) = |B_[0,n)| - |A_[0,n)|``.

    Capacity.  Write ``c = c_k``, ``c' = c_{k-1}``.  Every point of ``b``
    has ``l <= q - 1`` label components, so ``Δ_k`` is at most the number
    of such ``l``-tuples over ``[0, c)`` that use a label ``>= c'``:

        Δ_k <= Σ_{l<q} (c^l - c'^l) <= (c - c') Σ_{l<q} l·c^(l-1)
            <= (c - c')·(q - 1)·(c^(q-1) - 1)/(c - 1) <= (c - c')·c^(q-1)

    once ``c >= q``, and the right side is exactly the number of fresh
    slots.  The first batch needs ``δ(c) <= Σ_{l<q} c^l <= c^q``, true for
    ``c >= 2``.  Hence ``k0`` is chosen with ``c_k0 >= max(q, 2)`` and
    :class:`CapacityExceeded` signals a broken invariant.
    """

    def __init__(self, oracle: OracleState, a: SetExpr, b: SetExpr, arity: int,
                 start_stage: int, delta: CensusProfile, serial: int):
        self.oracle = oracle
        self.a, self.b = a, b
        self.arity = arity
        self.start_stage = start_stage
        self.serial = serial
        self._delta = delta
        self._batches: dict[int, tuple] = {}
        r, period = oracle.residue, oracle.period
        per = delta.at_period(period).per_residue
        self._profile = CensusProfile(
            period, tuple(per[r] if rho == r else None for rho in range(period)),
            oracle.length_at(start_stage))

    # profile and counts ------------------------------------------------------

    def chain_profile(self) -> CensusProfile:
        return self._profile

    def delta(self, k: int) -> int:
        return self._delta.at(self.oracle.length_at(k))

    def batch_size(self, k: int) -> int:
        if k < self.start_stage:
            return 0
        if k == self.start_stage:
            return self.delta(k)
        return self.delta(k) - self.delta(k - 1)

    def batch(self, k: int) -> tuple:
        """The points added at stage ``k`` (empty before the start stage)."""
        if k < self.start_stage:
            return ()
        cached = self._batches.get(k)
        if cached is not None:
            return cached
        c = self.oracle.length_at(k)
        q = self.arity
        need = self.batch_size(k)
        if need < 0:
            raise CapacityExceeded(f"negative batch at stage {k}; monotonicity broken")
        if k == self.start_stage:
            pool: Iterator[Point] = itertools.product(range(c), repeat=q)
        else:
            prev = self.oracle.length_at(k - 1)
            pool = ((x,) + rest for x in range(prev, c)
                    for rest in itertools.product(range(c), repeat=q - 1))
        pts = tuple(itertools.islice(pool, need))
        if len(pts) < need:
            raise CapacityExceeded(
                f"stage {k}: needed {need} fresh points of arity {q}, found {len(pts)}")
        self._batches[k] = pts
        return pts

    def _stages_for(self, top: int) -> range:
        """Stages whose batches can hold a point with all labels ``< top``."""
        k = self.start_stage
        while self.oracle.length_at(k) < top:
            k += 1
        return range(self.start_stage, k + 1)

    # SetExpr protocol ----------------------------------------------------------

    def census(self, index: Index) -> int:
        if not index.extra:
            k = self.oracle.stage_of_length(index.prefix)
            if k is not None and k >= self.start_stage:
                return self.delta(k)
        return len(self.points_within(index))

    def points_within(self, index: Index) -> frozenset:
        top = index.max_label + 1 if len(index) else 0
        return frozenset(p for k in self._stages_for(top) for p in self.batch(k)
                         if all(x in index for x in p))

    def contains(self, p: Point) -> bool:
        if len(p) != self.arity or not all(isinstance(x, int) for x in p):
            return False
        return any(p in self.batch(k) for k in self._stages_for(max(p) + 1))

    def stages(self, count: int) -> list[tuple[int, tuple]]:
        return [(k, self.batch(k))
                for k in range(self.start_stage, self.start_stage + count)]

    def export_text(self, count: int) -> str:
        """One line per stage: ``stage k: +Δ_k points: (…),(…)``."""
        lines = []
        for k, pts in self.stages(count):
            body = ",".join("(" + ",".join(map(str, p)) + ")" for p in pts)
            lines.append(f"stage {k}: +{len(pts)} points: {body}")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# Numerosity handles and the engine.


@dataclass(frozen=True, eq=False)
class Numerosity:
    representative: SetExpr
    engine: "Numerosities" = field(repr=False)

    def __add__(self, other: "Numerosity") -> "Numerosity":
        return self.engine.add(self, other)

    def __mul__(self, other: "Numerosity") -> "Numerosity":
        return self.engine.mul(self, other)

    def compare(self, other: "Numerosity") -> Ordering:
        return self.engine.cmp(self, other)

    def equals(self, other: "Numerosity") -> bool:
        return self.compare(other) is Ordering.EQUAL


@dataclass(frozen=True)
class AxiomOutcome:
    instance: tuple
    passed: bool
    vacuous: bool = False
    detail: str = ""
    stage: int | None = None  # evidence stage of the deciding comparison


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    outcomes: tuple

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    @property
    def failures(self) -> list[AxiomOutcome]:
        return [o for o in self.outcomes if not o.passed]


AXIOMS = ("E0", "E1", "E2", "E3", "E5", "AP", "PP", "UP", "CP", "WHP", "SubP-report")


def _is_subset(a: SetExpr, b: SetExpr) -> bool:
    return is_empty(difference(a, b))


class Numerosities:
    """The semiring of numerosities decided by one oracle."""

    def __init__(self, oracle: OracleState | None = None, chain_stages: int = 50):
        self.oracle = oracle or OracleState()
        self.chain_stages = chain_stages
        self._handles: dict[SetExpr, Numerosity] = {}
        self._serial = itertools.count(1)

    # basic operations ------------------------------------------------------------

    def _check(self, a: SetExpr) -> None:
        if not isinstance(a, SetExpr):
            raise UnsupportedExpression(f"not a set expression: {a!r}")
        stack = [a]
        while stack:
            e = stack.pop()
            if isinstance(e, Witness) and getattr(e.schedule, "oracle", None) is not self.oracle:
                raise UnsupportedExpression("witness belongs to a different oracle")
            stack.extend(getattr(e, k) for k in ("left", "right", "inner") if hasattr(e, k))

    def num(self, a: SetExpr) -> Numerosity:
        handle = self._handles.get(a)
        if handle is None:
            self._check(a)
            handle = self._handles[a] = Numerosity(a, self)
        return handle

    def _same(self, *xs: Numerosity) -> None:
        if any(x.engine is not self for x in xs):
            raise UnsupportedExpression("numerosities from different oracles")

    def disjoint_copy(self, x: SetExpr, y: SetExpr) -> SetExpr:
        """``y`` itself if it misses ``x``, else ``y × {(0,…,0)}`` padded past ``x``.

        The padded copy has only points longer than any point of ``x``, and
        it has the census of ``y`` at every index containing 0 (unit
        principle), which the cone on ``{0}`` guarantees along the chain.
        """
        try:
            if is_empty(intersect(x, y)):
                return y
        except NoClosedForm:
            pass
        j = max(len(s) for s in shapes(x)) - min(len(s) for s in shapes(y)) + 1
        self.oracle.ensure_cone([0])
        return product(y, finite([(0,) * j]))

    def add(self, x: Numerosity, y: Numerosity) -> Numerosity:
        self._same(x, y)
        return self.num(union(x.representative,
                              self.disjoint_copy(x.representative, y.representative)))

    def mul(self, x: Numerosity, y: Numerosity) -> Numerosity:
        self._same(x, y)
        return self.num(product(x.representative, y.representative))

    def cmp(self, x: Numerosity, y: Numerosity) -> Ordering:
        self._same(x, y)
        return self.oracle.compare(x.representative, y.representative).ordering

    def to_natural(self, x: Numerosity):
        """The size ``k`` if ``x`` is finite, else :data:`NotFinite`."""
        try:
            prof = chain_profile(x.representative)
        except NoClosedForm:
            raise UnsupportedExpression("finiteness needs a closed-form census") from None
        values = set()
        for f in prof.per_residue:
            if f is None:
                continue
            v = f.constant_value()
            if v is None:
                return NotFinite
            values.add(v)
        if len(values) != 1:
            return NotFinite
        v = values.pop()
        return int(v)

    # subtraction -------------------------------------------------------------------

    def sub_witness(self, a: SetExpr, b: SetExpr) -> SetExpr:
        """A nonempty ``C`` disjoint from ``a`` and ``b`` with ``a ∪ C ≃ b``."""
        for e in (a, b):
            self._check(e)
            if contains_witness(e) or any("p" in s for s in shapes(e)):
                raise UnsupportedExpression("witnesses need label tuples without witnesses")
        result = self.oracle.compare(a, b)
        if result.ordering is not Ordering.LESS:
            raise NotLess(f"{to_source(a)} is not below {to_source(b)}")
        mono_stage = self.oracle.ensure_monotone(a, b)
        q = 1 + max(len(s) for s in shapes(a) | shapes(b))
        k0 = max(mono_stage, result.evidence_stage)
        while self.oracle.length_at(k0) < max(q, 2):
            k0 += 1
        delta = chain_profile(b) - chain_profile(a)
        schedule = WitnessSchedule(self.oracle, a, b, q, k0, delta, next(self._serial))
        return Witness(schedule)

    # axioms ------------------------------------------------------------------------------

    def _ord(self, a: SetExpr, b: SetExpr):
        r = self.oracle.compare(a, b)
        return r.ordering, r.evidence_stage

    def _eq(self, a: SetExpr, b: SetExpr) -> bool:
        return self._ord(a, b)[0] is Ordering.EQUAL

    def check_axiom(self, axiom: str, instances: Sequence[Sequence[SetExpr]]) -> AxiomReport:
        """Evaluate one principle on each instance tuple.

        Implications whose hypothesis fails are reported as vacuous passes.
        """
        if axiom not in AXIOMS:
            raise UnsupportedExpression(f"unknown axiom {axiom!r}")
        check = getattr(self, "_ax_" + axiom.replace("-", "_"))
        outcomes = []
        for inst in instances:
            inst = tuple(inst)
            for e in inst:
                if isinstance(e, SetExpr):
                    self._check(e)
            out = check(*inst)
            src = tuple(to_source(e) if isinstance(e, SetExpr) else repr(e) for e in inst)
            outcomes.append(AxiomOutcome(src, *out))
        return AxiomReport(axiom, tuple(outcomes))

    # each returns (passed, vacuous, detail, stage)

    def _ax_E0(self, a):
        o, st = self._ord(a, EMPTY)
        if o is not Ordering.EQUAL:
            return True, True, f"{o} than the empty set", st
        ok = is_empty(a)
        return ok, False, "equal to the empty set" + ("" if ok else " but nonempty"), st

    def _ax_E1(self, a, b, c):
        if not (self._eq(a, c) and self._eq(b, c)):
            return True, True, "hypothesis fails", None
        o, st = self._ord(a, b)
        return o is Ordering.EQUAL, False, f"a {o} b", st

    def _ax_E2(self, a, b, a2, b2):
        hyp = (self._eq(a, a2) and self._eq(b, b2)
               and is_empty(intersect(a, b)) and is_empty(intersect(a2, b2)))
        if not hyp:
            return True, True, "hypothesis fails", None
        o, st = self._ord(union(a, b), union(a2, b2))
        return o is Ordering.EQUAL, False, f"unions {o}", st

    def _ax_E3(self, a, b, a2, b2):
        hyp = (_is_subset(b, a) and _is_subset(b2, a2)
               and self._eq(a, a2) and self._eq(b, b2))
        if not hyp:
            return True, True, "hypothesis fails", None
        o, st = self._ord(difference(a, b), difference(a2, b2))
        return o is Ordering.EQUAL, False, f"remainders {o}", st

    def _ax_E5(self, a, b):
        if not (_is_subset(a, b) and not is_empty(difference(b, a))):
            return True, True, "not a proper subset", None
        o, st = self._ord(a, b)
        return o is Ordering.LESS, False, f"part {o} whole", st

    def _ax_AP(self, a, b):
        left = self._eq(a, b)
        o, st = self._ord(difference(a, b), difference(b, a))
        right = o is Ordering.EQUAL
        return left == right, False, f"a≃b is {left}, a∖b≃b∖a is {right}", st

    def _ax_PP(self, a, b, c):
        if is_empty(c):
            return True, True, "empty multiplier", None
        ab = union(a, b)
        if not is_empty(intersect(product(ab, c), union(ab, c))):
            return True, True, "products meet the factors", None
        o1, _ = self._ord(a, b)
        o2, st = self._ord(product(a, c), product(b, c))
        return o1 is o2, False, f"a {o1} b, a×c {o2} b×c", st

    def _ax_UP(self, a, w: Point = (0,)):
        single = finite([w])
        aw = product(a, single)
        if not is_empty(intersect(aw, a)):
            return True, True, "a×{w} meets a", None
        o, st = self._ord(a, aw)
        return o is Ordering.EQUAL, False, f"a {o} a×{{w}}", st

    def _ax_CP(self, a, tau=None):
        if tau is None:
            lengths = {len(s) for s in shapes(a)}
            if len(lengths) == 1:
                n = lengths.pop()
                tau = ComponentPermutation(tuple(reversed(range(n))))
            else:
                tau = FiniteRelabel.of({0: 1, 1: 0})
        o, st = self._ord(rename(tau, a), a)
        return o is Ordering.EQUAL, False, f"τ[a] {o} a", st

    def _ax_WHP(self, a, b, sample: int = 50):
        o, st = self._ord(a, b)
        if o is Ordering.GREATER:
            return True, True, "a is larger", st
        na = self.to_natural(self.num(a))
        if na is not NotFinite:
            src = list(iter_points(a, na))
            dst = list(iter_points(b, na))
        else:
            src = list(iter_points(a, sample))
            dst = list(iter_points(b, sample))
        ok = (len(dst) == len(src) == len(set(dst))
              and all(contains(b, p) for p in dst) and all(contains(a, p) for p in src))
        scope = "all points" if na is not NotFinite else f"first {sample} points"
        return ok, False, f"injection by enumeration order on {scope}", st

    def _ax_SubP_report(self, a, b):
        o, st = self._ord(a, b)
        if o is not Ordering.LESS:
            return True, True, f"a {o} b, no witness required", st
        w = self.sub_witness(a, b)
        k0 = w.schedule.start_stage
        for k in range(k0, k0 + self.chain_stages):
            i = self.oracle.chain_at(k)
            if census_at(a, i) + census_at(w, i) != census_at(b, i):
                return False, False, f"census mismatch at stage {k}", k
        nonempty = w.schedule.delta(k0) > 0
        return nonempty, False, f"witness checked on {self.chain_stages} stages", k0


def function_set_experiment(x: SetExpr, y: SetExpr, lengths: Sequence[int]) -> list[dict]:
    """Census of finite partial maps ``X → Y`` along ``[0, n)``.

    A partial map with support in ``i`` chooses, for each ``x`` in ``X_i``,
    either no value or one of ``|Y_i|`` values, giving ``(|Y_i|+1)^|X_i|``.
    The rows set this against the power ``|Y_i|^|X_i|`` of total maps.
    Nothing else in the package depends on this.
    """
    rows = []
    for n in lengths:
        i = Index.below(n)
        xs, ys = census_at(x, i), census_at(y, i)
        rows.append({"n": n, "X": xs, "Y": ys,
                     "partial_maps": (ys + 1) ** xs, "total_maps": ys ** xs})
    return rows


__all__ = [
    "AXIOMS",
    "AxiomOutcome",
    "AxiomReport",
    "NotFinite",
    "Numerosities",
    "Numerosity",
    "WitnessSchedule",
    "function_set_experiment",
]
