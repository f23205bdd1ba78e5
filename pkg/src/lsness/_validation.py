"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import math
import numbers

import numpy as np

from .exceptions import SizeLimitError, UnsupportedCombinationError


def check_chain_length(n, *, minimum: int = 1, maximum: int | None = None, name: str = "n") -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(n).__name__}")
    n = int(n)
    if n < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {n}")
    if maximum is not None and n > maximum:
        raise SizeLimitError(f"{name}={n} exceeds the configured limit {maximum}")
    return n


def check_real(value, name: str, *, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def check_mode(mode: str) -> str:
    if mode not in ("exact", "numeric"):
        raise ValueError(f"mode must be 'exact' or 'numeric', got {mode!r}")
    return mode


def check_basis(basis: str, mode: str | None = None) -> str:
    if basis not in ("monomial", "orthonormal"):
        raise ValueError(f"basis must be 'monomial' or 'orthonormal', got {basis!r}")
    if mode == "exact" and basis == "orthonormal":
        raise UnsupportedCombinationError(
            "the orthonormal boson basis carries square roots; use basis='monomial' in exact mode"
        )
    return basis


def check_local_operator(X, sites: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("observable must be a square matrix")
    dim = X.shape[0]
    ell = round(math.log(dim, 3)) if dim > 0 else 0
    if 3**ell != dim or ell < 1:
        raise ValueError(f"observable dimension {dim} is not a power of 3")
    if sites is not None and ell != sites:
        raise ValueError(f"observable acts on {ell} sites, expected {sites}")
    if not np.all(np.isfinite(X)):
        raise ValueError("observable has non-finite entries")
    return X


def check_sector(nu, n: int) -> int:
    nu = check_chain_length(nu, minimum=0, name="sector")
    if nu > n:
        raise ValueError(f"sector {nu} out of range [0, {n}]")
    return nu
