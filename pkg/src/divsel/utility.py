"""Utility scoring and kernel assembly.

Relevance is pushed through a logistic transform that saturates near-exact
matches, then combined with max-normalized propagated weights into a single
utility per candidate:

    r*_j = 1 / (1 + exp(-k (r_j - x0)))
    u_j  = r*_j + beta * w_j / max(w)

The utility vector scales the similarity matrix into the selection kernel
``L = diag(u) S diag(u)``, whose diagonal carries item quality and whose
off-diagonal entries carry utility-weighted redundancy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

DEFAULT_STEEPNESS = 20.0
DEFAULT_MIDPOINT = 0.8
DEFAULT_BETA = 0.1


@dataclass(frozen=True)
class UtilityParams:
    """Logistic steepness, midpoint, and weight tie-break coefficient."""

    k: float = DEFAULT_STEEPNESS
    x0: float = DEFAULT_MIDPOINT
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        for name in ("k", "x0", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"utility parameter {name} must be finite")
        if self.k <= 0:
            raise InputError(f"steepness k must be positive, got {self.k}")
        if self.beta < 0:
            raise InputError(f"beta must be nonnegative, got {self.beta}")


@dataclass(frozen=True)
class UtilityResult:
    r_star: np.ndarray
    w_normalized: np.ndarray
    u: np.ndarray


def logistic_transform(r, params: UtilityParams = UtilityParams()) -> np.ndarray:
    """Element-wise logistic transform of relevance; strictly increasing."""
    r = np.asarray(r, dtype=np.float64)
    if not np.all(np.isfinite(r)):
        raise InputError("relevance values must be finite")
    return 1.0 / (1.0 + np.exp(-params.k * (r - params.x0)))


def normalize_weights(w) -> np.ndarray:
    """Scale weights to [0, 1] by the maximum; an all-zero vector stays zero."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0):
        raise InputError("weights must be nonnegative")
    wmax = w.max() if w.size else 0.0
    if wmax > 0:
        return w / wmax
    return np.zeros_like(w)


def utility(r_star, w, params: UtilityParams = UtilityParams()) -> np.ndarray:
    """Combine transformed relevance with a small weight boost.

    With all-zero weights or beta = 0 the weight term drops out and the
    result equals ``r_star`` exactly.
    """
    r_star = np.asarray(r_star, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if r_star.shape != w.shape:
        raise InputError("r_star and w must have the same length")
    wn = normalize_weights(w)
    if params.beta == 0.0 or wn.max(initial=0.0) == 0.0:
        return r_star.copy()
    return r_star + params.beta * wn


def compute_utility(r, w, params: UtilityParams = UtilityParams()) -> UtilityResult:
    """Full utility pass from raw relevance and raw propagated weights."""
    r_star = logistic_transform(r, params)
    wn = normalize_weights(w)
    return UtilityResult(r_star=r_star, w_normalized=wn, u=utility(r_star, w, params))


def build_lkernel(u, S: np.ndarray) -> np.ndarray:
    """Selection kernel ``L[i, j] = u_i * S[i, j] * u_j``.

    Equals diag(u) S diag(u); positive semidefinite whenever S is and
    u is nonnegative.
    """
    u = np.asarray(u, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InputError("S must be square")
    if u.shape != (S.shape[0],):
        raise InputError("u length must match S")
    if S.size and np.abs(S - S.T).max() > 1e-9:
        raise InputError("S must be symmetric")
    return u[:, None] * S * u[None, :]
