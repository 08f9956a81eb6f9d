"""Closed-form Bregman divergences with domain validation.

Four divergences are supported, each given by its generating convex
function phi:

* squared Euclidean        phi(x) = ||x||^2
* squared Mahalanobis      phi(x) = x^T A x, A symmetric positive definite
* generalized KL           phi(x) = sum_i x_i log x_i
* Itakura-Saito            phi(x) = -sum_i log x_i

All evaluation routines use the closed forms directly rather than the
generic phi / grad-phi expression; the equivalence of the two is covered
by tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQUARED_EUCLIDEAN = "squared-euclidean"
SQUARED_MAHALANOBIS = "squared-mahalanobis"
KL = "kl"
ITAKURA_SAITO = "itakura-saito"

KINDS = (SQUARED_EUCLIDEAN, SQUARED_MAHALANOBIS, KL, ITAKURA_SAITO)

# Relative pivot cutoff below which a Mahalanobis matrix is rejected as
# numerically singular.
_SPD_PIVOT_RTOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain required by the divergence."""


def _validate_spd(matrix: np.ndarray) -> np.ndarray:
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Mahalanobis matrix must be square, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("Mahalanobis matrix contains non-finite entries")
    scale = np.abs(a).max()
    if scale == 0.0 or np.abs(a - a.T).max() > _SPD_PIVOT_RTOL * scale:
        raise ValueError("Mahalanobis matrix must be symmetric")
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise ValueError("Mahalanobis matrix must be positive definite") from exc
    # Cholesky pivots are diag(L)^2; a tiny pivot means the matrix is
    # positive definite only up to rounding, which we reject as well.
    if (np.diag(chol) ** 2).min() < _SPD_PIVOT_RTOL * scale:
        raise ValueError("Mahalanobis matrix is numerically singular")
    a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DivergenceSpec:
    """Identifies a divergence; carries the matrix for the Mahalanobis case."""

    kind: str
    matrix: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown divergence kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == SQUARED_MAHALANOBIS:
            if self.matrix is None:
                raise ValueError("squared-mahalanobis requires a matrix")
            object.__setattr__(self, "matrix", _validate_spd(self.matrix))
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} does not take a matrix")

    @classmethod
    def squared_euclidean(cls) -> "DivergenceSpec":
        return cls(SQUARED_EUCLIDEAN)

    @classmethod
    def squared_mahalanobis(cls, matrix: np.ndarray) -> "DivergenceSpec":
        return cls(SQUARED_MAHALANOBIS, matrix)

    @classmethod
    def kl(cls) -> "DivergenceSpec":
        return cls(KL)

    @classmethod
    def itakura_saito(cls) -> "DivergenceSpec":
        return cls(ITAKURA_SAITO)


def load_mahalanobis_csv(path: str) -> np.ndarray:
    """Read a d x d matrix from a comma-separated file."""
    matrix = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return matrix


def domain_contains(spec: DivergenceSpec, value: np.ndarray, require_interior: bool = False) -> bool:
    """Whether ``value`` lies in dom(phi) (or its interior)."""
    v = np.asarray(value, dtype=np.float64)
    if not np.isfinite(v).all():
        return False
    if spec.kind in (SQUARED_EUCLIDEAN, SQUARED_MAHALANOBIS):
        return True
    if spec.kind == KL:
        # dom(phi) allows zeros; the interior does not.
        return bool((v > 0.0).all()) if require_interior else bool((v >= 0.0).all())
    return bool((v > 0.0).all())


def _closed_form(spec: DivergenceSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Divergence over the last axis; broadcasts over leading axes.

    Assumes in-domain inputs: first argument in dom(phi), second in its
    interior. Public entry points validate; internal hot paths rely on
    dataset-level validation done once up front.
    """
    if spec.kind == SQUARED_EUCLIDEAN:
        diff = x - y
        return np.einsum("...i,...i->...", diff, diff)
    if spec.kind == SQUARED_MAHALANOBIS:
        diff = x - y
        return np.einsum("...i,ij,...j->...", diff, spec.matrix, diff)
    if spec.kind == KL:
        x, y = np.broadcast_arrays(x, y)
        positive = x > 0.0
        logs = np.where(positive, x * np.log(np.where(positive, x, 1.0) / y), 0.0)
        return logs.sum(axis=-1) - x.sum(axis=-1) + y.sum(axis=-1)
    ratio = x / y
    return (ratio - np.log(ratio) - 1.0).sum(axis=-1)


def evaluate(spec: DivergenceSpec, x: np.ndarray, y: np.ndarray) -> float:
    """D(x, y) for a single pair of points, with full domain validation."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"expected matching 1-D vectors, got shapes {x.shape} and {y.shape}")
    if spec.kind == SQUARED_MAHALANOBIS and spec.matrix.shape[0] != x.shape[0]:
        raise ValueError(
            f"Mahalanobis matrix is {spec.matrix.shape[0]}-dimensional, points are {x.shape[0]}-dimensional"
        )
    if not domain_contains(spec, x):
        raise DomainError(f"first argument outside the domain of {spec.kind}")
    if not domain_contains(spec, y, require_interior=True):
        raise DomainError(f"second argument outside the interior domain of {spec.kind}")
    return float(_closed_form(spec, x, y))


def rowwise(spec: DivergenceSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Divergence over the last axis for pre-validated array inputs."""
    return _closed_form(spec, np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))


def pairwise(spec: DivergenceSpec, points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(N, K) matrix of divergences from each point to each center."""
    return _closed_form(spec, points[:, None, :], centers[None, :, :])
