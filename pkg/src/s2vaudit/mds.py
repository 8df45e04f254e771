"""Classical (Torgerson) multidimensional scaling for embedding clusters."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidDistances, TooFewPoints

log = logging.getLogger(__name__)

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class Mds2D:
    labels: tuple[tuple[str, int], ...]
    coords: np.ndarray
    eigenvalues: np.ndarray

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("label,occurrence_id,x,y\n")
        for (label, occ), (x, y) in zip(self.labels, self.coords.tolist()):
            out.write(f"{label},{occ},{x!r},{y!r}\n")
        return out.getvalue()


def pairwise_distances(points) -> np.ndarray:
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("points must be a 2-d array")
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def classical_mds(
    points=None,
    *,
    distances=None,
    out_dim: int = 2,
    labels=None,
) -> Mds2D:
    """Embed points (or a distance matrix) in ``out_dim`` dimensions.

    The squared distances are double-centered and diagonalized by cyclic
    Jacobi; coordinates are the top eigenvectors scaled by the square roots
    of their eigenvalues, negative ones clamped to zero. Each axis is
    flipped so its largest-magnitude entry is positive.
    """
    if (points is None) == (distances is None):
        raise ValueError("pass exactly one of points or distances")
    if distances is None:
        D = pairwise_distances(points)
    else:
        D = np.array(distances, dtype=np.float64)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise InvalidDistances("distance matrix must be square")
    n = D.shape[0]
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    if out_dim < 1 or out_dim > n:
        raise ValueError("bad out_dim")
    if not np.all(np.isfinite(D)):
        raise InvalidDistances("non-finite distance")
    if not np.array_equal(D, D.T):
        raise InvalidDistances("distance matrix is not symmetric")
    if np.any(np.diag(D) != 0.0):
        raise InvalidDistances("nonzero diagonal")
    if np.any(D < 0.0):
        raise InvalidDistances("negative distance")

    D2 = D * D
    row = D2.mean(axis=1)
    B = -0.5 * (D2 - row[:, None] - row[None, :] + row.mean())
    B = 0.5 * (B + B.T)

    evals, evecs, _ = kernels.jacobi_eigh(B, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    order = np.argsort(-evals, kind="stable")[:out_dim]
    top = evals[order]
    if np.any(top < 0.0):
        log.warning("clamping negative eigenvalues %s to zero (non-Euclidean distances)", top[top < 0.0])
    coords = evecs[:, order] * np.sqrt(np.clip(top, 0.0, None))[None, :]
    for k in range(out_dim):
        j = int(np.argmax(np.abs(coords[:, k])))
        if coords[j, k] < 0.0:
            coords[:, k] = -coords[:, k]
    coords = coords - coords.mean(axis=0)

    if labels is None:
        labels = [(str(i), 0) for i in range(n)]
    labels = tuple((str(w), int(o)) for w, o in labels)
    if len(labels) != n:
        raise ValueError("labels and points differ in length")
    return Mds2D(labels, coords, np.sort(evals)[::-1])
