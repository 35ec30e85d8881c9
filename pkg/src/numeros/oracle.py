"""A deterministic generic chain of indices standing in for a fine ultrafilter.

The chain is ``i_k = [0, c_k)`` with ``c_0 < c_1 < ...``.  Every comparison
narrows the set of admissible ``c`` to one residue class modulo a growing
period and raises a lower bound, so that the sign of the counting-function
difference is constant on the rest of the chain.  Cones are realised by the
same lower bound: once ``c > max(d)``, every later index contains ``d``.

All decisions are logged as commitments; each is re-checked whenever the
chain grows, and the log alone suffices to rebuild the chain.
"""

from __future__ import annotations

import bisect
import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .census import NoClosedForm, census_at, chain_profile
from .errors import (
    BudgetExceeded,
    InconsistentCommitment,
    NotDominated,
    UnsupportedExpression,
)
from .pointset import FiniteRelabel, Index, Renamed, SetExpr, to_source


class Ordering(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"

    @classmethod
    def from_sign(cls, s: int) -> "Ordering":
        """Ordering of ``a`` against ``b`` given the sign of ``|B_i| - |A_i|``."""
        return {1: cls.LESS, 0: cls.EQUAL, -1: cls.GREATER}[s]

    def flip(self) -> "Ordering":
        return {Ordering.LESS: Ordering.GREATER, Ordering.GREATER: Ordering.LESS}.get(self, self)

    def __str__(self) -> str:
        return self.value


_SIGN_RANK = {0: 0, 1: 1, -1: 2}  # Equal < Less < Greater


@dataclass(frozen=True)
class OracleConfig:
    residue_preference: str = "lowest"
    budget: int = 64
    scan_bound: int = 12
    verify: bool = True

    def __post_init__(self) -> None:
        if self.residue_preference not in ("lowest", "highest"):
            raise ValueError("residue_preference must be 'lowest' or 'highest'")
        if self.budget < 1:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class Commitment:
    """One logged decision; ``stage`` is the first chain stage it governs."""

    stage: int
    kind: str  # Cone | SignDecision | Monotone | StrictDominance
    params: dict
    a: SetExpr | None = field(default=None, compare=False, repr=False)
    b: SetExpr | None = field(default=None, compare=False, repr=False)

    def to_line(self) -> str:
        return (f"stage={self.stage} kind={self.kind} "
                f"params={json.dumps(self.params, sort_keys=True, ensure_ascii=False)}")

    @classmethod
    def from_line(cls, line: str) -> "Commitment":
        head, _, params = line.partition(" params=")
        fields = dict(part.split("=", 1) for part in head.split())
        return cls(int(fields["stage"]), fields["kind"], json.loads(params))


@dataclass(frozen=True)
class CompareResult:
    ordering: Ordering
    evidence_stage: int
    residue: int
    period: int
    threshold: int  # least admissible c from which the sign is constant
    budgeted: bool = False

    def flipped(self) -> "CompareResult":
        return CompareResult(self.ordering.flip(), self.evidence_stage, self.residue,
                             self.period, self.threshold, self.budgeted)


def _relabel_domains(a: SetExpr) -> set[int]:
    out: set[int] = set()
    stack = [a]
    while stack:
        e = stack.pop()
        if isinstance(e, Renamed) and isinstance(e.tau, FiniteRelabel):
            out |= set(e.tau.domain)
        stack.extend(getattr(e, k) for k in ("left", "right", "inner") if hasattr(e, k))
    return out


def _sign(x) -> int:
    return (x > 0) - (x < 0)


class OracleState:
    """The chain, its admissibility constraints and the commitment log."""

    def __init__(self, config: OracleConfig | None = None):
        self.config = config or OracleConfig()
        self.lengths: list[int] = []
        self.period = 1
        self.residue = 0
        self.next_min = 0
        self.forced: set[int] = set()
        self.log: list[Commitment] = []
        self._cache: dict[tuple, CompareResult] = {}

    # -- chain -------------------------------------------------------------

    def _next_length(self) -> int:
        lo = max(self.next_min, self.lengths[-1] + 1 if self.lengths else 0)
        return lo + (self.residue - lo) % self.period

    def chain_at(self, k: int) -> Index:
        """Materialise the chain through stage ``k`` and return ``i_k``."""
        while len(self.lengths) <= k:
            self.lengths.append(self._next_length())
            if self.config.verify:
                self._verify_stage(len(self.lengths) - 1)
        return Index.below(self.lengths[k])

    def length_at(self, k: int) -> int:
        self.chain_at(k)
        return self.lengths[k]

    def stage_of_length(self, c: int) -> int | None:
        """The stage whose index is ``[0, c)``, if one is materialised."""
        k = bisect.bisect_left(self.lengths, c)
        return k if k < len(self.lengths) and self.lengths[k] == c else None

    @property
    def stage(self) -> int:
        """The next unmaterialised stage; new commitments start here."""
        return len(self.lengths)

    def _delta_at(self, a: SetExpr, b: SetExpr, k: int) -> int:
        index = Index.below(self.lengths[k])
        return census_at(b, index) - census_at(a, index)

    def _verify_stage(self, k: int) -> None:
        c = self.lengths[k]
        for com in self.log:
            if k < com.stage:
                continue
            p = com.params
            ok = True
            if com.kind == "Cone":
                ok = all(x < c for x in p["labels"])
            elif com.kind == "SignDecision":
                if "window" in p:
                    if k >= com.stage + p["window"]:
                        continue
                elif c % p["period"] != p["residue"]:
                    ok = False
                ok = ok and _sign(self._delta_at(com.a, com.b, k)) == p["sign"]
            elif com.kind == "Monotone":
                if k > com.stage:
                    ok = self._delta_at(com.a, com.b, k) >= self._delta_at(com.a, com.b, k - 1)
            elif com.kind == "StrictDominance":
                ok = self._delta_at(com.a, com.b, k) > 0
            if not ok:
                raise InconsistentCommitment(
                    f"commitment {com.to_line()} fails at stage {k} (length {c})")

    def _commit(self, kind: str, params: dict, a=None, b=None) -> Commitment:
        com = Commitment(self.stage, kind, params, a, b)
        self.log.append(com)
        return com

    # -- cones ---------------------------------------------------------------

    def ensure_cone(self, d: Iterable[int]) -> None:
        """Every later chain index contains ``d``."""
        labels = sorted(set(d))
        if not labels or (set(labels) <= self.forced and labels[-1] < self.next_min):
            return
        self.forced |= set(labels)
        self.next_min = max(self.next_min, labels[-1] + 1)
        self._commit("Cone", {"labels": labels, "next_min": self.next_min})

    # -- comparison ------------------------------------------------------------

    def compare(self, a: SetExpr, b: SetExpr) -> CompareResult:
        """Decide ``a`` against ``b`` on the rest of the chain."""
        cached = self._cache.get((a, b))
        if cached is not None:
            return cached
        cached = self._cache.get((b, a))
        if cached is not None:
            return cached.flipped()
        self.ensure_cone(_relabel_domains(a) | _relabel_domains(b))
        try:
            result = self._compare_closed(a, b)
        except NoClosedForm:
            result = self._compare_budgeted(a, b)
        self._cache[(a, b)] = result
        return result

    def _compare_closed(self, a: SetExpr, b: SetExpr) -> CompareResult:
        delta = chain_profile(b) - chain_profile(a)
        period = math.lcm(self.period, delta.period)
        delta = delta.at_period(period)
        candidates = []
        for rho in range(self.residue % self.period, period, self.period):
            f = delta.per_residue[rho]
            if f is None:
                continue
            s, t0 = f.eventual_sign()
            candidates.append((rho, _SIGN_RANK[s], s, t0, f))
        if not candidates:
            raise InconsistentCommitment("no residue class compatible with the chain")
        if self.config.residue_preference == "lowest":
            rho, _, s, t0, f = min(candidates, key=lambda x: (x[0], x[1]))
        else:
            rho, _, s, t0, f = max(candidates, key=lambda x: (x[0], -x[1]))
        threshold = max(period * t0 + rho, delta.valid_from)
        if s >= 0:
            ms, mt = f.forward_difference().eventual_sign()
            if ms < 0:
                raise InconsistentCommitment("nonnegative difference cannot decrease forever")
            threshold = max(threshold, period * mt + rho)
        self.period, self.residue = period, rho
        self.next_min = max(self.next_min, threshold)
        stage = self.stage
        pair = {"a": to_source(a), "b": to_source(b)}
        self._commit("SignDecision", {**pair, "sign": s, "residue": rho, "period": period,
                                      "next_min": self.next_min}, a, b)
        if s >= 0:
            self._commit("Monotone", {**pair, "next_min": self.next_min}, a, b)
        return CompareResult(Ordering.from_sign(s), stage, rho, period, threshold)

    def _compare_budgeted(self, a: SetExpr, b: SetExpr) -> CompareResult:
        stage = self.stage
        budget = self.config.budget
        signs = {_sign(census_at(b, self.chain_at(k)) - census_at(a, self.chain_at(k)))
                 for k in range(stage, stage + budget)}
        if len(signs) != 1:
            raise UnsupportedExpression(
                f"sign not settled within a budget of {budget} stages")
        s = signs.pop()
        self._commit("SignDecision", {"a": to_source(a), "b": to_source(b), "sign": s,
                                      "window": budget}, a, b)
        return CompareResult(Ordering.from_sign(s), stage, self.residue, self.period,
                             self.lengths[stage], budgeted=True)

    def ensure_monotone(self, a: SetExpr, b: SetExpr) -> int:
        """Make ``|B_i| - |A_i|`` nondecreasing on the rest of the chain.

        Returns the stage from which this holds.  Requires a closed form
        and a prior comparison showing the difference is eventually >= 0.
        """
        for com in self.log:
            if com.kind == "Monotone" and com.a == a and com.b == b:
                return com.stage
        delta = (chain_profile(b) - chain_profile(a)).at_period(self.period)
        f = delta.per_residue[self.residue]
        ms, mt = f.forward_difference().eventual_sign()
        if ms < 0:
            raise InconsistentCommitment("difference is eventually decreasing")
        self.next_min = max(self.next_min, self.period * mt + self.residue)
        com = self._commit("Monotone", {"a": to_source(a), "b": to_source(b),
                                        "next_min": self.next_min}, a, b)
        return com.stage

    def commit_strict_dominance(self, a: SetExpr, b: SetExpr) -> Commitment:
        """Make ``|A_i| < |B_i|`` hold at every later chain index.

        Once ``a`` compares Less than ``b`` the sign decision already forces
        ``c`` into a class and beyond a bound where ``|B| - |A| > 0``; each
        later stage is then a fresh index with more ``b``-points than
        ``a``-points, which is the chain-extension step of the construction.
        """
        if a == b:
            raise NotDominated("a set does not strictly dominate itself")
        result = self.compare(a, b)
        if result.ordering is not Ordering.LESS:
            raise NotDominated(f"{to_source(a)} is not below {to_source(b)}")
        return self._commit("StrictDominance", {"a": to_source(a), "b": to_source(b),
                                                "next_min": self.next_min}, a, b)

    # -- log -------------------------------------------------------------------

    def log_lines(self) -> list[str]:
        return [c.to_line() for c in self.log]

    def dump(self) -> str:
        return "".join(line + "\n" for line in self.log_lines())

    @classmethod
    def replay(cls, lines: Iterable[str], stages: int,
               config: OracleConfig | None = None) -> "OracleState":
        """Rebuild a chain of ``stages`` stages from a commitment log.

        Only the admissibility constraints recorded in the log are used, so
        no expression needs to be re-evaluated.
        """
        state = cls(OracleConfig(**{**(config or OracleConfig()).__dict__, "verify": False}))
        for line in lines:
            line = line.strip()
            if not line:
                continue
            com = Commitment.from_line(line)
            if com.stage > 0:
                state.chain_at(com.stage - 1)
            if com.stage != state.stage:
                raise InconsistentCommitment(f"log out of order at {line!r}")
            p = com.params
            if com.kind == "Cone":
                state.forced |= set(p["labels"])
            if "period" in p:
                state.period, state.residue = p["period"], p["residue"]
            if "next_min" in p:
                state.next_min = max(state.next_min, p["next_min"])
            if "window" in p and stages > 0:
                state.chain_at(com.stage + p["window"] - 1)
            state.log.append(com)
        if stages > 0:
            state.chain_at(stages - 1)
        return state


# --------------------------------------------------------------------------
# Exhaustive scan of the descent colouring on a finite subset lattice.


@dataclass(frozen=True)
class ScanReport:
    """Result of :func:`partition_scan` on the subsets of ``[0, k)``.

    Chains are lists of sets; lengths count strict-descent steps.
    """

    k: int
    longest_zero_chain: int
    zero_chain: tuple
    zero_pairs: int
    max_descents_on_maximal_chain: int
    homogeneous_cofinal: tuple | None
    well_founded: bool
    infinite_descent_certificate: None = None


def _as_table(psi, k: int) -> list[int]:
    full = 1 << k
    sets = [frozenset(j for j in range(k) if m >> j & 1) for m in range(full)]
    if callable(psi):
        table = [psi(s) for s in sets]
    else:
        table = [psi[s] for s in sets]
    if any(not isinstance(v, int) or v < 0 for v in table):
        raise ValueError("psi must be natural-number valued")
    return table


def _mask_set(m: int) -> frozenset:
    return frozenset(j for j in range(m.bit_length()) if m >> j & 1)


def partition_scan(psi: Callable[[frozenset], int] | Mapping[frozenset, int], k: int,
                   bound: int = 12) -> ScanReport:
    """Scan the colouring ``G(i, j) = 0 iff psi(i) > psi(j)`` for ``i ⊂ j ⊆ [0,k)``.

    Reports the longest strictly descending ``⊂``-chain (a 0-chain), the
    largest number of descents along a maximal chain ``∅ ⊂ ... ⊂ [0,k)``, and
    a maximal chain on which ``psi`` is nondecreasing (1-homogeneous and
    cofinal) if one exists.  A natural-number valued ``psi`` admits no
    infinite descent; here that is confirmed by every descent count being
    bounded by ``k``.
    """
    if k > bound:
        raise BudgetExceeded(f"ground set of size {k} exceeds the scan bound {bound}")
    table = _as_table(psi, k)
    full = 1 << k
    # longest 0-chain ending at each mask, over all proper submasks
    longest = [0] * full
    back = [-1] * full
    zero_pairs = 0
    for m in range(full):
        best, arg = 0, -1
        s = (m - 1) & m
        while True:
            if s != m and table[s] > table[m]:
                zero_pairs += 1
                if longest[s] + 1 > best:
                    best, arg = longest[s] + 1, s
            if s == 0:
                break
            s = (s - 1) & m
        longest[m], back[m] = best, arg
    top = max(range(full), key=lambda m: (longest[m], -m))
    chain = [top]
    while back[chain[-1]] >= 0:
        chain.append(back[chain[-1]])
    zero_chain = tuple(_mask_set(m) for m in reversed(chain))

    # maximal chains: single-element steps from the empty set to [0,k)
    descents = [0] * full
    homog = [False] * full
    homog_back = [-1] * full
    homog[0] = True
    for m in range(1, full):
        for j in range(k):
            if m >> j & 1:
                s = m ^ (1 << j)
                descents[m] = max(descents[m], descents[s] + (table[s] > table[m]))
                if homog[s] and table[s] <= table[m] and not homog[m]:
                    homog[m], homog_back[m] = True, s
    cofinal = None
    if homog[full - 1]:
        path = [full - 1]
        while path[-1] != 0:
            path.append(homog_back[path[-1]])
        cofinal = tuple(_mask_set(m) for m in reversed(path))
    max_desc = descents[full - 1]
    return ScanReport(
        k=k,
        longest_zero_chain=longest[top],
        zero_chain=zero_chain,
        zero_pairs=zero_pairs,
        max_descents_on_maximal_chain=max_desc,
        homogeneous_cofinal=cofinal,
        well_founded=max_desc <= k and longest[top] <= k,
    )


__all__ = [
    "Commitment",
    "CompareResult",
    "OracleConfig",
    "OracleState",
    "Ordering",
    "ScanReport",
    "partition_scan",
]
