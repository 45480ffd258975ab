"""Bundled example data."""

from __future__ import annotations

from .qualitative import ContingencyTable

MONUMENT_CATEGORIES = (
    "préhistorique",
    "historique",
    "chateau",
    "militaire",
    "cathédrale",
    "église",
    "chapelle",
    "monastère",
    "civil publique",
    "civil privé",
    "divers",
)

# COMM commune, PRIV private, ETAT state, DEPA departement, ETPU public body, NDET undetermined
MONUMENT_OWNERS = ("COMM", "PRIV", "ETAT", "DEPA", "ETPU", "NDET")

_MONUMENT_COUNTS = (
    (244, 790, 115, 9, 12, 144),
    (246, 166, 46, 23, 11, 31),
    (289, 964, 82, 58, 40, 2),
    (351, 76, 59, 7, 2, 0),
    (0, 0, 87, 0, 0, 0),
    (4298, 74, 16, 5, 4, 2),
    (481, 119, 13, 7, 8, 4),
    (243, 233, 44, 37, 18, 0),
    (339, 47, 92, 19, 41, 2),
    (224, 909, 46, 7, 18, 4),
    (967, 242, 109, 40, 10, 9),
)


def monuments_table() -> ContingencyTable:
    """Listed historical monuments in France by category and by owner."""
    return ContingencyTable(_MONUMENT_COUNTS, MONUMENT_CATEGORIES, MONUMENT_OWNERS)


__all__ = ["MONUMENT_CATEGORIES", "MONUMENT_OWNERS", "monuments_table"]
