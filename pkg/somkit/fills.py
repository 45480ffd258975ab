"""Fill pattern helpers for shading super-classes on a map."""

from __future__ import annotations

from typing import Tuple

from .helpers import darken, fmt

FILL_STYLES = ("solid", "hatch")
HATCH_PATTERNS = ("stripes", "crosshatch", "dots", "back-stripes")


def def_stripes(
    id_: str,
    base: str,
    stripe: str,
    gap: int = 6,
    angle: int = 45,
    opacity: float = 0.6,
) -> str:
    return (
        f'<pattern id="{id_}" patternUnits="userSpaceOnUse" width="{gap * 2}" height="{gap * 2}" '
        f'patternTransform="rotate({angle})">'
        f'<rect width="100%" height="100%" fill="{base}"/>'
        f'<rect x="0" y="0" width="{gap}" height="100%" fill="{stripe}" opacity="{fmt(opacity)}"/>'
        f"</pattern>"
    )


def def_crosshatch(
    id_: str,
    base: str,
    stripe: str,
    gap: int = 6,
    opacity: float = 0.6,
) -> str:
    return (
        f'<pattern id="{id_}" patternUnits="userSpaceOnUse" width="{gap}" height="{gap}">'
        f'<rect width="100%" height="100%" fill="{base}"/>'
        f'<path d="M0,0 L{gap},0 M0,0 L0,{gap}" stroke="{stripe}" stroke-width="{fmt(gap / 4)}" '
        f'opacity="{fmt(opacity)}"/>'
        f"</pattern>"
    )


def def_dots(
    id_: str,
    base: str,
    dot: str = "#000000",
    size: float = 1.5,
    gap: int = 6,
    opacity: float = 0.6,
) -> str:
    return (
        f'<pattern id="{id_}" patternUnits="userSpaceOnUse" width="{gap}" height="{gap}">'
        f'<rect width="100%" height="100%" fill="{base}"/>'
        f'<circle cx="{fmt(gap / 2)}" cy="{fmt(gap / 2)}" r="{fmt(size)}" fill="{dot}" '
        f'opacity="{fmt(opacity)}"/>'
        f"</pattern>"
    )


def build_fill(style: str, label: int, base: str) -> Tuple[str, str]:
    """Return ``(pattern definition, fill reference)`` for super-class ``label``.

    ``solid`` fills with the colour itself; ``hatch`` cycles through the
    hatch patterns so neighbouring labels stay apart in greyscale prints.
    """
    if style == "solid":
        return "", base
    id_ = f"sc{label}"
    ink = darken(base, 0.5)
    pattern = HATCH_PATTERNS[label % len(HATCH_PATTERNS)]
    if pattern == "stripes":
        defs = def_stripes(id_, base, ink, angle=45)
    elif pattern == "crosshatch":
        defs = def_crosshatch(id_, base, ink)
    elif pattern == "dots":
        defs = def_dots(id_, base, ink)
    else:
        defs = def_stripes(id_, base, ink, angle=-45)
    return defs, f"url(#{id_})"


__all__ = [
    "FILL_STYLES",
    "HATCH_PATTERNS",
    "build_fill",
    "def_crosshatch",
    "def_dots",
    "def_stripes",
]
