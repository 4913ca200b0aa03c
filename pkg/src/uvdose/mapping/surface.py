"""Surface point clouds: extraction from the octree, filtering, normals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_points
from ..exceptions import DimensionMismatch, EmptyRegion, TooFewPoints
from ..geometry import RiskClass, SurfacePoint


@dataclass
class SurfaceCloud:
    """Array-backed collection of surface points.

    ``viewpoint`` is either one sensor origin (3,) or one per point (n, 3);
    normals are kept on the viewpoint side of each point.
    """

    positions: np.ndarray
    normals: np.ndarray
    risk: np.ndarray
    dose: np.ndarray
    source_label: str = ""
    viewpoint: np.ndarray = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        n = len(self.positions)
        self.normals = np.asarray(self.normals, dtype=float).reshape(-1, 3)
        self.risk = np.broadcast_to(np.asarray(self.risk, dtype=np.int8), (n,)).copy()
        self.dose = np.broadcast_to(np.asarray(self.dose, dtype=float), (n,)).copy()
        if len(self.normals) != n:
            raise DimensionMismatch("positions and normals differ in length")
        if self.viewpoint is None:
            self.viewpoint = np.zeros(3)
        self.viewpoint = np.asarray(self.viewpoint, dtype=float)
        if self.viewpoint.shape not in ((3,), (n, 3)):
            raise DimensionMismatch("viewpoint must be (3,) or (n, 3)")

    @classmethod
    def from_positions(cls, positions, risk=RiskClass.NON_HOTSPOT, viewpoint=None, label=""):
        positions = check_points(positions)
        viewpoint = np.zeros(3) if viewpoint is None else np.asarray(viewpoint, dtype=float)
        normals = _toward(positions, viewpoint)
        return cls(positions, normals, int(RiskClass.parse(risk)), 0.0, label, viewpoint)

    @classmethod
    def concatenate(cls, clouds, label=""):
        clouds = list(clouds)
        vps = [np.broadcast_to(c.viewpoint, c.positions.shape) for c in clouds]
        return cls(
            np.concatenate([c.positions for c in clouds]),
            np.concatenate([c.normals for c in clouds]),
            np.concatenate([c.risk for c in clouds]),
            np.concatenate([c.dose for c in clouds]),
            label,
            np.concatenate(vps),
        )

    def __len__(self):
        return len(self.positions)

    def viewpoints(self):
        return np.broadcast_to(self.viewpoint, self.positions.shape)

    def subset(self, index):
        vp = self.viewpoint if self.viewpoint.ndim == 1 else self.viewpoint[index]
        return SurfaceCloud(self.positions[index], self.normals[index], self.risk[index],
                            self.dose[index], self.source_label, vp)

    def points(self):
        return [SurfacePoint(p, n, RiskClass(int(r)), float(d))
                for p, n, r, d in zip(self.positions, self.normals, self.risk, self.dose)]


def _toward(positions, viewpoint):
    d = np.broadcast_to(viewpoint, positions.shape) - positions
    norm = np.linalg.norm(d, axis=1, keepdims=True)
    out = np.tile([0.0, 0.0, 1.0], (len(positions), 1))
    ok = norm[:, 0] > 0
    out[ok] = d[ok] / norm[ok]
    return out


def voxel_downsample(points, voxel_size, origin=(0.0, 0.0, 0.0)):
    """Keep the first point of every voxel; returns the kept indices."""
    points = check_points(points)
    keys = np.floor((points - np.asarray(origin)) / voxel_size).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return np.sort(first)


def mean_knn_distance(points, k):
    points = check_points(points)
    k = min(int(k), len(points) - 1)
    if k < 1:
        return np.zeros(len(points))
    dist, _ = cKDTree(points).query(points, k=k + 1)
    return dist[:, 1:].mean(axis=1)


def statistical_outlier_mask(points, k=8, alpha=1.0):
    """Inlier mask: mean k-NN distance at most ``mean + alpha * std``."""
    d = mean_knn_distance(points, k)
    if len(d) == 0:
        return np.zeros(0, dtype=bool)
    threshold = d.mean() + alpha * d.std()
    # distances equal up to rounding must not be split by the threshold
    return d <= threshold + 1e-9 * max(d.mean(), 1e-12)


class StatisticalOutlierFilter(TransformerMixin, BaseEstimator):
    """Remove points whose mean distance to their k nearest neighbors is unusual.

    ``fit`` computes ``inlier_mask_`` for the fitted cloud; ``transform`` must
    be called on that same cloud and returns only the inliers.
    """

    def __init__(self, k=8, alpha=1.0):
        self.k = k
        self.alpha = alpha

    def fit(self, X, y=None):
        X = check_points(X)
        self.n_features_in_ = 3
        self.inlier_mask_ = statistical_outlier_mask(X, self.k, self.alpha)
        self.n_samples_fit_ = len(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "inlier_mask_")
        X = check_points(X)
        if len(X) != self.n_samples_fit_:
            raise DimensionMismatch("transform expects the cloud passed to fit")
        return X[self.inlier_mask_]


def _orient(normals, positions, viewpoints):
    to_view = viewpoints - positions
    dots = np.einsum("ij,ij->i", normals, to_view)
    flip = dots < 0
    # ties resolve toward +z, then +y, then +x
    tie = dots == 0
    for axis in (2, 1, 0):
        undecided = tie & (normals[:, axis] != 0)
        flip |= undecided & (normals[:, axis] < 0)
        tie &= normals[:, axis] == 0
    normals[flip] *= -1.0
    return normals


def pca_normals(points, k=12, viewpoints=None):
    """Smallest-eigenvalue eigenvector of each point's k-NN covariance."""
    points = check_points(points)
    if len(points) < k + 1:
        raise TooFewPoints(f"need at least {k + 1} points for k={k}, got {len(points)}")
    _, idx = cKDTree(points).query(points, k=k + 1)
    nbrs = points[idx]
    centered = nbrs - nbrs.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / (k + 1)
    _, vecs = np.linalg.eigh(cov)
    normals = vecs[:, :, 0].copy()
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    if viewpoints is None:
        viewpoints = points + np.array([0.0, 0.0, 1.0])
    return _orient(normals, points, np.broadcast_to(viewpoints, points.shape))


def estimate_normals(cloud: SurfaceCloud, k=12) -> SurfaceCloud:
    normals = pca_normals(cloud.positions, k, cloud.viewpoints())
    return SurfaceCloud(cloud.positions.copy(), normals, cloud.risk.copy(), cloud.dose.copy(),
                        cloud.source_label, cloud.viewpoint.copy())


class NormalEstimator(TransformerMixin, BaseEstimator):
    """Transformer from positions (n, 3) to unit normals (n, 3).

    ``viewpoint`` is the sensor origin used for orientation; ``None`` orients
    normals toward +z.
    """

    def __init__(self, k=12, viewpoint=None):
        self.k = k
        self.viewpoint = viewpoint

    def fit(self, X, y=None):
        X = check_points(X)
        if len(X) < self.k + 1:
            raise TooFewPoints(f"need at least {self.k + 1} points")
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_points(X)
        vp = None if self.viewpoint is None else np.asarray(self.viewpoint, dtype=float)
        return pca_normals(X, self.k, vp)


def extract_surface(tree, label_region, viewpoint, risk=RiskClass.NON_HOTSPOT, label="",
                    k_filter=8, alpha=1.0, threshold=0.5) -> SurfaceCloud:
    """Occupied leaf centers inside an axis-aligned box, outlier-filtered.

    Normals are initialized toward the viewpoint; run :func:`estimate_normals`
    to replace them with surface normals.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in label_region)
    centers = tree.occupied_centers(threshold)
    if len(centers):
        inside = np.all((centers >= lo) & (centers <= hi), axis=1)
        centers = centers[inside]
    if len(centers) == 0:
        raise EmptyRegion(f"no occupied leaves inside region {lo.tolist()}..{hi.tolist()}")
    centers = centers[voxel_downsample(centers, tree.resolution, tree.origin)]
    if len(centers) > k_filter:
        centers = centers[statistical_outlier_mask(centers, k_filter, alpha)]
    vp = np.asarray(viewpoint, dtype=float)
    return SurfaceCloud.from_positions(centers, risk, vp, label)
