"""Built-in charts: Cartesian, cylinder, sphere, simple torus and the shifted cylinder.

Conventions:

* sphere is physics order ``(r, theta, phi)`` with ``theta`` polar, ``0 < theta < pi``;
* toroidal is ``(r, theta, phi)`` with major radius parameter ``R0`` and
  ``R0 + r*cos(theta) > 0``;
* shifted-cylinder tilts the z axis by ``alpha`` in the y-z plane, with
  ``0 < alpha < pi/2``.
"""
from __future__ import annotations

import enum
from functools import lru_cache

from .geometry import CoordinateChart
from .parser import parse_chart

_SOURCES = {
    "cartesian": """
coordinates: x, y, z
map.x = x
map.y = y
map.z = z
""",
    "cylinder": """
coordinates: r, phi, z
assume: r > 0
map.x = r*cos(phi)
map.y = r*sin(phi)
map.z = z
""",
    "sphere": """
coordinates: r, theta, phi
assume: r > 0, 0 < theta < pi
map.x = r*sin(theta)*cos(phi)
map.y = r*sin(theta)*sin(phi)
map.z = r*cos(theta)
""",
    "toroidal": """
coordinates: r, theta, phi
parameters: R0
assume: r > 0, R0 > 0, R0 + r*cos(theta) > 0
map.x = (R0 + r*cos(theta))*cos(phi)
map.y = (R0 + r*cos(theta))*sin(phi)
map.z = r*sin(theta)
""",
    "shifted-cylinder": """
coordinates: r, phi, z
parameters: alpha
assume: r > 0, 0 < alpha < pi/2
map.x = r*cos(phi)
map.y = r*sin(phi) + z*sin(alpha)
map.z = z*cos(alpha)
""",
}


class BuiltinChartId(enum.Enum):
    CARTESIAN = "cartesian"
    CYLINDER = "cylinder"
    SPHERE = "sphere"
    TOROIDAL = "toroidal"
    SHIFTED_CYLINDER = "shifted-cylinder"


_ALIASES = {"shiftedcylinder": "shifted-cylinder", "shifted_cylinder": "shifted-cylinder"}


def _key(name: str) -> str | None:
    k = name.strip().lower()
    k = _ALIASES.get(k, k)
    return k if k in _SOURCES else None


def is_builtin(name) -> bool:
    return isinstance(name, BuiltinChartId) or _key(str(name)) is not None


def builtin_names() -> list[str]:
    return list(_SOURCES)


def chart_source(name) -> str:
    """Chart-file text of a built-in, usable as a template for custom charts."""
    key = name.value if isinstance(name, BuiltinChartId) else _key(name)
    if key is None:
        raise KeyError(name)
    return _SOURCES[key].lstrip()


@lru_cache(maxsize=None)
def _load(key: str) -> CoordinateChart:
    return CoordinateChart(parse_chart(_SOURCES[key], key))


def builtin_chart(name) -> CoordinateChart:
    """Chart for a :class:`BuiltinChartId` or a case-insensitive name."""
    key = name.value if isinstance(name, BuiltinChartId) else _key(str(name))
    if key is None:
        raise KeyError(f"unknown built-in chart {name!r}; choose from {', '.join(_SOURCES)}")
    return _load(key)
