"""Ackermann coding of hereditarily finite sets into the natural numbers.

A hereditarily finite set is a ``frozenset`` of hereditarily finite sets.
Its code is ``γ(X) = Σ_{x ∈ X} 2^γ(x)``: the members' codes are the bit
positions that are set, so coding is a bijection onto ``ℕ``.  Codes grow
as towers of two (rank 5 sets already need 65536 bits), which Python's
integers handle exactly.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable

from .errors import DSLSyntaxError
from .pointset import Index, SetExpr, finite

HFSet = frozenset

EMPTY_HF: HFSet = frozenset()


def encode(x: HFSet) -> int:
    return _encode(x)


@functools.lru_cache(maxsize=None)
def _encode(x: HFSet) -> int:
    return sum(1 << _encode(y) for y in x)


@functools.lru_cache(maxsize=65536)
def decode(n: int) -> HFSet:
    if n < 0:
        raise ValueError("codes are natural numbers")
    return frozenset(decode(j) for j in range(n.bit_length()) if n >> j & 1)


def rank(x: HFSet) -> int:
    """``0`` for the empty set, else one more than the largest member rank."""
    return max((rank(y) + 1 for y in x), default=0)


def hf_sets_of_rank_below(r: int) -> list[HFSet]:
    """All of ``V_r``: the sets of rank ``< r``, in code order."""
    size = 0
    for _ in range(r):
        size = 1 << size
    return [decode(n) for n in range(size)]


def to_text(x: HFSet) -> str:
    """Braces notation with members sorted by code, e.g. ``{{},{{}}}``."""
    return "{" + ",".join(to_text(y) for y in sorted(x, key=encode)) + "}"


def parse_hf(text: str) -> HFSet:
    """Parse the braces notation; whitespace is ignored."""
    s = "".join(text.split())
    pos = 0

    def parse() -> HFSet:
        nonlocal pos
        if pos >= len(s) or s[pos] != "{":
            raise DSLSyntaxError(1, pos + 1, "'{'", s[pos:pos + 1])
        pos += 1
        members = []
        if pos < len(s) and s[pos] == "}":
            pos += 1
            return EMPTY_HF
        while True:
            members.append(parse())
            if pos < len(s) and s[pos] == ",":
                pos += 1
                continue
            if pos < len(s) and s[pos] == "}":
                pos += 1
                return frozenset(members)
            raise DSLSyntaxError(1, pos + 1, "',' or '}'", s[pos:pos + 1])

    out = parse()
    if pos != len(s):
        raise DSLSyntaxError(1, pos + 1, "end of input", s[pos:pos + 1])
    return out


def code_set(xs: Iterable[HFSet]) -> SetExpr:
    """The arity-1 set of codes of the members of ``xs``."""
    return finite((encode(x),) for x in xs)


@dataclass(frozen=True)
class DoubletonReport:
    pairs: int          # |X|·|Y|
    codes: int          # distinct doubleton codes
    degenerate: int     # pairs with x = y, whose doubleton is a singleton
    collisions: int     # pairs - codes


def doubleton_product(xs: Iterable[HFSet], ys: Iterable[HFSet]) -> tuple[SetExpr, DoubletonReport]:
    """Codes of ``{x, y}`` for ``x ∈ X``, ``y ∈ Y`` with a count of coincidences."""
    xs, ys = list(set(xs)), list(set(ys))
    codes = set()
    degenerate = 0
    for x in xs:
        for y in ys:
            degenerate += x == y
            codes.add(encode(frozenset({x, y})))
    pairs = len(xs) * len(ys)
    report = DoubletonReport(pairs, len(codes), degenerate, pairs - len(codes))
    return finite((c,) for c in codes), report


def pair_closed_index(xs: Iterable[HFSet], ys: Iterable[HFSet]) -> Index:
    """Codes of all members of ``X`` and ``Y`` and of every doubleton ``{x, y}``.

    On such an index each factor is counted in full, so the doubleton
    product's census is the product of the factors' censuses whenever no two
    pairs share a doubleton.
    """
    xs, ys = set(xs), set(ys)
    labels = {encode(x) for x in xs | ys}
    labels |= {encode(frozenset({x, y})) for x in xs for y in ys}
    return Index.of(labels)


__all__ = [
    "DoubletonReport",
    "EMPTY_HF",
    "HFSet",
    "code_set",
    "decode",
    "doubleton_product",
    "encode",
    "hf_sets_of_rank_below",
    "pair_closed_index",
    "parse_hf",
    "rank",
    "to_text",
]
