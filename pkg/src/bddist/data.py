"""Observed sample container: outcomes, bivariate scores, treatment mask."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import AssignmentRule


@dataclass(frozen=True)
class Sample:
    """Rows of (Y_i, X_i) with the treatment indicator derived from a rule.

    The treatment indicator is never taken from the data file; it is always
    recomputed from the assignment rule applied to the score.
    """

    y: np.ndarray
    x: np.ndarray
    treated: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        treated = np.asarray(self.treated, dtype=bool)
        if y.ndim != 1 or len(y) < 1:
            raise InvalidInputError("y must be a nonempty 1-d array")
        if x.shape != (len(y), 2):
            raise InvalidInputError(f"x must have shape ({len(y)}, 2), got {x.shape}")
        if treated.shape != y.shape:
            raise InvalidInputError("treated mask must match y in length")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise InvalidInputError("sample contains non-finite values")
        for arr in (y, x, treated):
            arr.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "treated", treated)

    @classmethod
    def from_data(cls, y, x, rule: AssignmentRule) -> "Sample":
        x = np.asarray(x, dtype=float)
        return cls(np.asarray(y, dtype=float), x, rule.contains(x))

    def __len__(self) -> int:
        return len(self.y)
