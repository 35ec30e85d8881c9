"""Euclidean numerosities of finitary point sets over the natural-number line."""

from __future__ import annotations

from .census import (
    CensusProfile,
    census_at,
    census_profile,
    exact_support_count,
    solve_counting_difference,
)
from .errors import NumerosError
from .numerosity import NotFinite, Numerosities, Numerosity
from .oracle import OracleConfig, OracleState, Ordering, partition_scan
from .pointset import (
    EMPTY,
    Index,
    SetExpr,
    build_atom,
    combine,
    contains,
    difference,
    fin_powerset,
    finite,
    intersect,
    product,
    progression,
    rename,
    support_of,
    union,
)

__all__ = [
    "CensusProfile",
    "EMPTY",
    "Index",
    "NotFinite",
    "NumerosError",
    "Numerosities",
    "Numerosity",
    "OracleConfig",
    "OracleState",
    "Ordering",
    "SetExpr",
    "build_atom",
    "census_at",
    "census_profile",
    "combine",
    "contains",
    "difference",
    "exact_support_count",
    "fin_powerset",
    "finite",
    "intersect",
    "partition_scan",
    "product",
    "progression",
    "rename",
    "solve_counting_difference",
    "support_of",
    "union",
]
