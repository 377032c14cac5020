"""scikit-learn style wrappers so the diagnostics compose with pipelines.

Points are passed as rows of a real array ``[Re z_1 .. Re z_n, Im z_1 .. Im z_n]``
(shape ``(m, 2n)``) or as a complex array of shape ``(m, n)``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import BergmanError
from .geometry import asymptotic_fit, einstein_constant, einstein_diagnostics
from .groups import FiniteUnitaryGroup, group_from_config, validate
from .kernels import KernelSpec


def check_points(X, n: int) -> np.ndarray:
    """Validate sample points and return them as a complex ``(m, n)`` array."""
    X = np.asarray(X)
    if np.iscomplexobj(X):
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != n:
            raise ValueError(f"expected complex points of shape (m, {n}), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("points contain NaN or infinity")
        return X.astype(np.complex128)
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2 * n:
        raise ValueError(f"expected {2 * n} real columns (Re z, Im z), got {X.shape[1]}")
    return X[:, :n] + 1j * X[:, n:]


def _resolve_group(group, n: int) -> FiniteUnitaryGroup | None:
    if group is None or isinstance(group, FiniteUnitaryGroup):
        return group
    return group_from_config(group, n)


class BergmanKernel(TransformerMixin, BaseEstimator):
    """Evaluate the (quotient) Bergman kernel, or its logarithm, at points.

    ``fit`` only validates the group and builds the kernel field.
    """

    def __init__(self, dimension=2, group=None, variant="averaged", log=False):
        self.dimension = dimension
        self.group = group
        self.variant = variant
        self.log = log

    def fit(self, X=None, y=None):
        group = _resolve_group(self.group, self.dimension)
        if group is not None:
            report = validate(group)
            if not report.ok:
                raise ValueError(f"group failed validation: {report}")
        self.spec_ = KernelSpec(self.dimension, group, self.variant)
        self.field_ = self.spec_.potential() if self.log else self.spec_.kernel()
        self.n_features_in_ = 2 * self.dimension
        return self

    def transform(self, X):
        check_is_fitted(self, "field_")
        Z = check_points(X, self.dimension)
        return np.array([[self.field_.value(z).real] for z in Z])

    def get_feature_names_out(self, input_features=None):
        return np.array(["log_kernel" if self.log else "kernel"], dtype=object)


class BergmanDiagnostics(TransformerMixin, BaseEstimator):
    """Per-point Einstein diagnostics: residual, B-invariant ratio, det g.

    Points where evaluation fails yield a row of NaN unless ``errors="raise"``.
    """

    columns = ("einstein_residual", "b_ratio", "det_g")

    def __init__(self, dimension=2, group=None, variant="averaged", errors="nan"):
        self.dimension = dimension
        self.group = group
        self.variant = variant
        self.errors = errors

    def fit(self, X=None, y=None):
        if self.errors not in ("nan", "raise"):
            raise ValueError("errors must be 'nan' or 'raise'")
        group = _resolve_group(self.group, self.dimension)
        self.spec_ = KernelSpec(self.dimension, group, self.variant)
        self.kernel_ = self.spec_.kernel()
        self.potential_ = self.spec_.potential()
        self.n_features_in_ = 2 * self.dimension
        return self

    def transform(self, X):
        check_is_fitted(self, "potential_")
        Z = check_points(X, self.dimension)
        const = einstein_constant(self.dimension)
        out = np.full((len(Z), len(self.columns)), np.nan)
        for i, z in enumerate(Z):
            try:
                d = einstein_diagnostics(self.potential_, z, kernel=self.kernel_)
            except BergmanError:
                if self.errors == "raise":
                    raise
                continue
            out[i] = (d.residual_norm, d.b_invariant / const, d.G)
        return out

    def score(self, X, y=None, tol=1e-8):
        """Fraction of points where the metric is Einstein to ``tol``."""
        res = self.transform(X)[:, 0]
        return float(np.mean(res < tol))

    def get_feature_names_out(self, input_features=None):
        return np.array(self.columns, dtype=object)


class BoundaryAsymptoticRegressor(RegressorMixin, BaseEstimator):
    """Regress ``value ~ A (1 - t^2)^-p (1 + B (1 - t^2)^q)`` along a ray.

    ``X`` holds the ray parameter ``t`` in a single column.
    """

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.shape[1] != 1 or len(y) != X.shape[0]:
            raise ValueError("X must be a single column of ray parameters matching y")
        fit = asymptotic_fit(zip(X[:, 0], y))
        self.fit_ = fit
        self.A_, self.p_, self.B_, self.q_ = fit.A, fit.p, fit.B, fit.q
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        X = check_array(X, dtype=np.float64)
        s = 1 - X[:, 0] ** 2
        corr = 0.0 if not np.isfinite(self.q_) else self.B_ * s**self.q_
        return self.A_ * s ** (-self.p_) * (1 + corr)
