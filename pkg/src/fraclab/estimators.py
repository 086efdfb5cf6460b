"""scikit-learn style wrappers around clouds, projections and box counting.

Point arrays are ``(n_samples, n_features)``; the covering radius of the
sample is passed as the ``resolution`` hyper-parameter since plain arrays
do not carry it.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dimension import box_count, finest_scales
from .errors import PreconditionError
from .ifs import WeightedCloud
from .maps import SmoothMap, as_direction, radial_project


class BoxCountingDimension(BaseEstimator):
    """Box-counting slope of a point sample.

    Parameters
    ----------
    scales : sequence of float, optional
        Explicit strictly decreasing scales.  When omitted, the finest
        window of powers of ``ratio`` allowed by ``resolution`` is used.
    decades : float
        Width of that window in factors of ten.
    ratio : float
        Scale factor between consecutive scales.
    resolution : float
        Covering radius of the sample.
    min_ratio : float
        Smallest scale over resolution.

    Attributes
    ----------
    dimension_ : float
    r_squared_ : float
    result_ : BoxCountResult
    """

    def __init__(self, scales=None, decades=2.0, ratio=0.5, resolution=0.0, min_ratio=4.0):
        self.scales = scales
        self.decades = decades
        self.ratio = ratio
        self.resolution = resolution
        self.min_ratio = min_ratio

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        self.n_features_in_ = X.shape[1]
        cloud = WeightedCloud(X, np.ones(len(X)), self.resolution)
        scales = self.scales
        if scales is None:
            if self.resolution <= 0:
                raise PreconditionError("give explicit scales or a positive resolution")
            scales = finest_scales(cloud, self.ratio, self.decades, self.min_ratio)
        self.result_ = box_count(cloud, scales)
        self.dimension_ = self.result_.slope
        self.r_squared_ = self.result_.r_squared
        return self

    def score(self, X=None, y=None) -> float:
        """r^2 of the log-log fit."""
        check_is_fitted(self, "result_")
        return self.r_squared_


class _PointTransformer(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        self.n_features_in_ = X.shape[1]
        self._validate_features(X.shape[1])
        return self

    def _validate_features(self, n_features: int) -> None:
        pass

    def _checked(self, X) -> np.ndarray:
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X


class OrthogonalProjection(_PointTransformer):
    """Project points onto the line spanned by ``direction``."""

    def __init__(self, direction=(1.0, 0.0)):
        self.direction = direction

    def _validate_features(self, n_features):
        self.direction_ = as_direction(self.direction)
        if len(self.direction_) != n_features:
            raise ValueError(f"direction has {len(self.direction_)} coordinates, X has {n_features}")

    def transform(self, X):
        X = self._checked(X)
        return (X @ self.direction_)[:, None]


class RadialProjection(_PointTransformer):
    """Map points to ``x / ||x||``; with ``angle=True`` planar points go to their angle."""

    def __init__(self, angle=False, exclusion_radius=1e-12):
        self.angle = angle
        self.exclusion_radius = exclusion_radius

    def _validate_features(self, n_features):
        if self.angle and n_features != 2:
            raise ValueError("the angle coordinate needs planar points")

    def transform(self, X):
        X = self._checked(X)
        cloud = radial_project(WeightedCloud(X, np.ones(len(X)), 0.0), self.exclusion_radius)
        if self.angle:
            return np.arctan2(cloud.points[:, 1], cloud.points[:, 0])[:, None]
        return cloud.points


class SmoothMapTransformer(_PointTransformer):
    """Apply a :class:`SmoothMap` (or its descriptor dict) to each point."""

    def __init__(self, g=None):
        self.g = g

    def _validate_features(self, n_features):
        if self.g is None:
            raise ValueError("no map given")
        self.map_ = self.g if isinstance(self.g, SmoothMap) else SmoothMap.from_descriptor(self.g)
        if self.map_.dim != n_features:
            raise ValueError(f"map acts on R^{self.map_.dim}, X has {n_features} features")

    def transform(self, X):
        X = self._checked(X)
        return self.map_.value(X)[:, None]
