"""A small record type returned by all ``*_check`` functions."""
from dataclasses import dataclass, field

import numpy as np


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


@dataclass
class Report:
    """Outcome of a numerical check.

    ``passed`` is the verdict; ``values`` carries the quantities that led to
    it (both sides of an inequality, margins, constants used, caveats).
    Values are also reachable as attributes: ``report.margin``.
    """

    name: str
    passed: bool
    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        values = self.__dict__.get("values", {})
        if key in values:
            return values[key]
        raise AttributeError(key)

    def __bool__(self):
        return bool(self.passed)

    def as_dict(self):
        return {"name": self.name, "passed": bool(self.passed), **_plain(self.values)}
