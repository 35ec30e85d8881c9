"""Exponential polynomials ``f(t) = Σ_b p_b(t)·b^t`` over the rationals.

Counting functions of point sets along one residue class of chain stages
have this form: products of progressions give ordinary polynomials in the
stage variable, finite powersets contribute the exponential bases.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

Poly = tuple  # coefficients, lowest degree first, no trailing zeros


def _trim(coeffs: Iterable) -> Poly:
    c = [Fraction(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return _trim((p[k] if k < len(p) else 0) + (q[k] if k < len(q) else 0) for k in range(n))


def _pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _peval(p: Poly, t) -> Fraction:
    acc = Fraction(0)
    for a in reversed(p):
        acc = acc * t + a
    return acc


def _pcompose_affine(p: Poly, alpha: int, beta: int) -> Poly:
    """``p(alpha*t + beta)``."""
    acc: Poly = ()
    lin = _trim((beta, alpha))
    for a in reversed(p):
        acc = _padd(_pmul(acc, lin), (a,))
    return acc


class ExpPoly:
    """Immutable exponential polynomial in one integer variable ``t``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, Iterable] | None = None):
        clean = {}
        for base, coeffs in (terms or {}).items():
            if base < 1:
                raise ValueError("bases must be positive integers")
            p = _trim(coeffs)
            if p:
                clean[base] = p
        self.terms: tuple = tuple(sorted(clean.items()))

    @classmethod
    def const(cls, c) -> "ExpPoly":
        return cls({1: (c,)})

    @classmethod
    def linear(cls, a, b) -> "ExpPoly":
        """``a*t + b``."""
        return cls({1: (b, a)})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExpPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        d = dict(self.terms)
        for b, p in other.terms:
            d[b] = _padd(d.get(b, ()), p)
        return ExpPoly(d)

    def __neg__(self) -> "ExpPoly":
        return ExpPoly({b: tuple(-a for a in p) for b, p in self.terms})

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        d: dict[int, Poly] = {}
        for b1, p1 in self.terms:
            for b2, p2 in other.terms:
                b = b1 * b2
                d[b] = _padd(d.get(b, ()), _pmul(p1, p2))
        return ExpPoly(d)

    def __call__(self, t: int) -> Fraction:
        return sum((_peval(p, t) * Fraction(b) ** t for b, p in self.terms), Fraction(0))

    def affine(self, alpha: int, beta: int) -> "ExpPoly":
        """Substitute ``t -> alpha*t + beta`` (``alpha >= 1``, ``beta >= 0``)."""
        d: dict[int, Poly] = {}
        for b, p in self.terms:
            q = _pcompose_affine(p, alpha, beta)
            q = tuple(a * Fraction(b) ** beta for a in q)
            nb = b ** alpha
            d[nb] = _padd(d.get(nb, ()), q)
        return ExpPoly(d)

    def shift(self, k: int = 1) -> "ExpPoly":
        return self.affine(1, k)

    def forward_difference(self) -> "ExpPoly":
        return self.shift() - self

    def constant_value(self) -> Fraction | None:
        """The value if ``self`` is a constant, else ``None``."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and self.terms[0][0] == 1 and len(self.terms[0][1]) == 1:
            return self.terms[0][1][0]
        return None

    def eventual_sign(self) -> tuple[int, int]:
        """Return ``(s, t0)`` with ``sign(self(t)) == s`` for every ``t >= t0``.

        ``t0`` is the least such nonnegative integer.  The bound used before
        the final downward scan is rigorous: the dominant term beats the sum
        of the others once ``(B/b2)^t > Q t^e / |a_d|``, and that inequality
        stays true because its log-ratio is increasing past ``e/ln(B/b2)``.
        """
        if not self.terms:
            return 0, 0
        B, p = self.terms[-1]
        d = len(p) - 1
        lead = p[d]
        s = 1 if lead > 0 else -1
        rest = sum(abs(a) for a in p[:d])
        # for t >= t_a: |p(t)| >= t^(d-1) (|lead| t - rest) >= |lead|
        t_a = int(rest / abs(lead)) + 2 if d >= 1 else 0
        others = self.terms[:-1]
        if not others:
            t = max(t_a, 0)
        else:
            b2 = others[-1][0]
            Q = sum(abs(a) for _, q in others for a in q)
            e = max(len(q) - 1 for _, q in others)
            t = max(t_a, 1, math.ceil(e / math.log(B / b2)) + 1)
            while not abs(lead) * Fraction(B) ** t > Q * Fraction(t) ** e * Fraction(b2) ** t:
                t += 1
        while t > 0:
            v = self(t - 1)
            if (v > 0) - (v < 0) != s:
                break
            t -= 1
        return s, t

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for b, p in self.terms:
            poly = " + ".join(
                f"{a}" if k == 0 else f"{a}*t" if k == 1 else f"{a}*t^{k}"
                for k, a in enumerate(p) if a
            )
            parts.append(f"({poly})" if b == 1 else f"({poly})*{b}^t")
        return " + ".join(parts)
