"""Exponent invariants of finite p-groups given by polycyclic presentations."""

from pgw.pcp import (
    CollectionLimitError,
    InconsistentPresentationError,
    PcPresentation,
    PresentationError,
    collect,
    consistency_check,
    element_order,
    inverse,
    multiply,
    parse_pcp,
    power,
)
from pgw.groups import GroupTable, Subgroup, pc_group

__version__ = "0.1.0"

__all__ = [
    "CollectionLimitError",
    "GroupTable",
    "InconsistentPresentationError",
    "PcPresentation",
    "PresentationError",
    "Subgroup",
    "collect",
    "consistency_check",
    "element_order",
    "inverse",
    "multiply",
    "parse_pcp",
    "pc_group",
    "power",
]
