"""Input validation helpers shared by the public functions and estimators."""

import numbers

import numpy as np

from .exceptions import ValidationError


def check_matrix(a, name="matrix", square=True, ndim=2):
    """Return `a` as a finite float64 array, checking its shape.

    ``ndim=None`` accepts stacks of matrices (``(..., m, n)``).
    """
    arr = np.asarray(a, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.ndim < 2:
        raise ValidationError(f"{name} must be at least 2-dimensional, got shape {arr.shape}")
    if square and arr.shape[-1] != arr.shape[-2]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def check_vector(v, name="vector", size=None):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise ValidationError(f"{name} must have length {size}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_positive_float(value, name, strict=True):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value < 0 or (strict and value == 0):
        raise ValidationError(f"{name} must be {'>' if strict else '>='} 0, got {value}")
    return value


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    if seed >= 2**64:
        raise ValidationError("seed must fit in 64 bits")
    return int(seed)


def check_degree(k, d):
    """Subspace dimension k must satisfy 0 <= k < d."""
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        raise ValidationError(f"k must be an integer, got {k!r}")
    if not 0 <= k < d:
        raise ValidationError(f"k < d required (0 <= k < d), got k={k}, d={d}")
    return int(k)


def check_measure(mu):
    # Local import: group imports this module.
    from .group import MeasureSpec

    if not isinstance(mu, MeasureSpec):
        raise ValidationError(f"expected a MeasureSpec, got {type(mu).__name__}")
    return mu
