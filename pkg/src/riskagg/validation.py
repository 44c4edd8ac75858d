"""Input checks shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .data import ClaimDataset


def check_amounts(X) -> np.ndarray:
    """Coerce policy totals to a 1-d float array of finite nonnegative values.

    Accepts a :class:`ClaimDataset`, a 1-d array, or a single-column 2-d array.
    """
    if isinstance(X, ClaimDataset):
        return X.amounts
    arr = check_array(X, ensure_2d=False, dtype=np.float64, input_name="X")
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected a single column of amounts, got shape {arr.shape}")
        arr = arr[:, 0]
    if np.any(arr < 0):
        raise ValueError("amounts must be nonnegative")
    return arr


def check_levels(u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(~((u > 0) & (u < 1))):
        raise ValueError("levels must lie strictly between 0 and 1")
    return u
