"""Sign facts about symbols, used for square-root extraction and sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import Expr, Symbol


@dataclass(frozen=True)
class Assumptions:
    """Positivity facts attached to a chart.

    positive:
        names of symbols known to be > 0.
    intervals:
        ``name -> (lo, hi)`` open bounds as floats (``0 < theta < pi``).
    positive_exprs:
        whole expressions known to be > 0, e.g. ``R0 + r*cos(theta)``.
    """

    positive: frozenset = frozenset()
    intervals: tuple = ()
    positive_exprs: tuple = ()
    _bounds: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_bounds", {n: (lo, hi) for n, lo, hi in self.intervals})

    def bounds(self, name: str) -> tuple[float, float] | None:
        return self._bounds.get(name)

    def is_positive_symbol(self, name: str) -> bool:
        if name in self.positive:
            return True
        b = self._bounds.get(name)
        return b is not None and b[0] >= 0

    def sin_positive(self, arg: Expr) -> bool:
        if not isinstance(arg, Symbol):
            return False
        b = self._bounds.get(arg.name)
        return b is not None and b[0] >= 0 and b[1] <= math.pi + 1e-15

    def cos_positive(self, arg: Expr) -> bool:
        if not isinstance(arg, Symbol):
            return False
        b = self._bounds.get(arg.name)
        return b is not None and b[0] >= -math.pi / 2 - 1e-15 and b[1] <= math.pi / 2 + 1e-15

    def merged(self, other: "Assumptions") -> "Assumptions":
        return Assumptions(
            positive=self.positive | other.positive,
            intervals=self.intervals + tuple(i for i in other.intervals if i not in self.intervals),
            positive_exprs=self.positive_exprs
            + tuple(e for e in other.positive_exprs if e not in self.positive_exprs),
        )

    def __bool__(self) -> bool:
        return bool(self.positive or self.intervals or self.positive_exprs)


NONE = Assumptions()
