"""Bergman metric, curvature and Monge-Ampere diagnostics from jets.

Every quantity is read off one jet of the potential ``u = log K`` (or of the
kernel ``K`` itself) at the base point, so callers that need several of them
should compute the jet once and pass it in place of the field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .exceptions import (
    DegenerateFit,
    InsufficientSamples,
    NonpositiveKernel,
    NonpositiveMetricDet,
    NotPositiveDefinite,
    NumericConsistencyError,
)
from .jets import (
    Jet,
    det_jet,
    extract_deriv,
    gradient_jets,
    hessian_jets,
    jet_log,
)
from .kernels import ScalarField

IMAG_TOL = 1e-8
PIVOT_TOL = 1e-12


def einstein_constant(n: int) -> float:
    """``(n+1)^n pi^n / n!``: the boundary value of the B-invariant."""
    return (n + 1) ** n * math.pi**n / math.factorial(n)


def ma_constant(n: int, group_order: int = 1) -> float:
    """Right-hand-side constant ``c`` of ``det(u_{i jbar}) = c e^u`` on a quotient."""
    return einstein_constant(n) * group_order


def as_real(x, what: str = "quantity") -> float:
    """Drop the imaginary part of a value that must be real, after checking it."""
    x = complex(x)
    if abs(x.imag) > IMAG_TOL * (1 + abs(x.real)):
        raise NumericConsistencyError(f"{what} should be real, got {x}")
    return x.real


def _jet_of(u, z0, order: int) -> Jet:
    if isinstance(u, Jet):
        if u.order < order:
            raise ValueError(f"need a jet of order >= {order}, got {u.order}")
        return u.truncate(order)
    return u.jet(z0, order)


def _dim(u) -> int:
    return u.n


# ---------------------------------------------------------------------------
# metric and its determinant


def complex_hessian(u, z0=None) -> np.ndarray:
    """Matrix ``u_{i jbar}(z0)`` (the metric when ``u = log K``)."""
    j = _jet_of(u, z0, 2)
    n = j.n
    h = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for k in range(n):
            e_i = [0] * n
            e_k = [0] * n
            e_i[i] = 1
            e_k[k] = 1
            h[i, k] = extract_deriv(j, e_i, e_k)
    return h


def metric(u, z0=None) -> np.ndarray:
    """Bergman metric ``g_{i jbar} = d^2 log K / dz_i dzbar_j`` at ``z0``.

    ``u`` is the potential field (``log K``) or a precomputed jet of it.
    """
    return complex_hessian(u, z0)


def metric_det(u, z0=None, extra_order: int = 0) -> Jet:
    """Jet of ``G = det(g)`` of order ``extra_order``."""
    j = _jet_of(u, z0, extra_order + 2)
    return det_jet(hessian_jets(j))


def _hermitian_part(h: np.ndarray, what: str) -> np.ndarray:
    scale = 1 + np.max(np.abs(h))
    if np.max(np.abs(h - h.conj().T)) > IMAG_TOL * scale:
        raise NumericConsistencyError(f"{what} is not Hermitian")
    return 0.5 * (h + h.conj().T)


def cholesky(h: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises :class:`NotPositiveDefinite` on a small pivot."""
    h = _hermitian_part(np.asarray(h, dtype=np.complex128), "matrix")
    n = h.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(h)))))
    L = np.zeros_like(h)
    for k in range(n):
        pivot = h[k, k].real - np.sum(np.abs(L[k, :k]) ** 2)
        if pivot <= PIVOT_TOL * scale:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at index {k}")
        L[k, k] = math.sqrt(pivot)
        for i in range(k + 1, n):
            L[i, k] = (h[i, k] - np.sum(L[i, :k] * L[k, :k].conj())) / L[k, k]
    return L


def is_positive_definite(h) -> bool:
    try:
        cholesky(h)
    except NotPositiveDefinite:
        return False
    return True


# ---------------------------------------------------------------------------
# B-invariant and Ricci


def b_invariant(k: ScalarField, z0=None, group_order: int | None = None) -> float:
    """``B = det(g) / k`` with ``g`` the Bergman metric of the kernel ``k``.

    For a quotient kernel ``K_G`` (averaged over the group) the quotient's own
    kernel in ball coordinates is ``|G| K_G``, and that is what ``B`` divides
    by; ``group_order`` defaults to ``k.group_order``.
    """
    if group_order is None:
        group_order = getattr(k, "group_order", 1)
    kj = _jet_of(k, z0, 2)
    kval = as_real(kj.value, "kernel value")
    if kval <= 0:
        raise NonpositiveKernel(f"kernel value {kval} is not positive")
    G = as_real(metric_det(jet_log(kj), extra_order=0).value, "det g")
    return G / (group_order * kval)


def _ricci_from_jet(j: Jet) -> np.ndarray:
    G = metric_det(j, extra_order=2)
    if not as_real(G.value, "det g") > 0:
        raise NonpositiveMetricDet(f"det g = {complex(G.value)} is not positive")
    return -complex_hessian(jet_log(G))


def ricci(u, z0=None) -> np.ndarray:
    """Ricci form ``R_{i jbar} = -d^2 log det g / dz_i dzbar_j``."""
    return _ricci_from_jet(_jet_of(u, z0, 4))


def residual_norm(g: np.ndarray, r: np.ndarray) -> float:
    """Spectral radius of ``g^{-1}(R + g)``, i.e. the deviation from ``R = -g``."""
    L = cholesky(g)
    Linv = np.linalg.inv(L)
    sym = Linv @ (r + g) @ Linv.conj().T
    sym = 0.5 * (sym + sym.conj().T)
    return float(np.max(np.abs(np.linalg.eigvalsh(sym))))


@dataclass(frozen=True)
class EinsteinDiagnostics:
    point: np.ndarray
    g: np.ndarray
    G: float
    ricci: np.ndarray
    residual_norm: float
    b_invariant: float | None = None


def einstein_diagnostics(u: ScalarField, z0, kernel: ScalarField | None = None):
    """All Einstein-related quantities at ``z0`` from a single 4-jet of ``u``.

    When ``kernel`` is given the B-invariant is included.
    """
    j = u.jet(z0, 4)
    g = complex_hessian(j)
    G = as_real(det_jet(hessian_jets(j.truncate(2))).value, "det g")
    R = _ricci_from_jet(j)
    res = residual_norm(g, R)
    b = None
    if kernel is not None:
        b = G / (kernel.group_order * as_real(kernel.value(z0), "kernel value"))
    return EinsteinDiagnostics(
        point=np.asarray(z0, dtype=np.complex128),
        g=g,
        G=G,
        ricci=R,
        residual_norm=res,
        b_invariant=b,
    )


def einstein_residual(u, z0=None) -> float:
    j = _jet_of(u, z0, 4)
    g = complex_hessian(j)
    return residual_norm(g, _ricci_from_jet(j))


# ---------------------------------------------------------------------------
# Fefferman's J operator


def _bordered(j: Jet):
    """Bordered matrix ``[[u, u_bbar], [u_a, u_{a bbar}]]`` of jets."""
    n = j.n
    u = j.truncate(j.order - 2)
    hol, anti = gradient_jets(j)
    hol = [h.truncate(j.order - 2) for h in hol]
    anti = [a.truncate(j.order - 2) for a in anti]
    hess = hessian_jets(j)
    rows = [[u] + anti]
    for a in range(n):
        rows.append([hol[a]] + hess[a])
    return rows


def j_operator_jet(u, z0=None, extra_order: int = 0) -> Jet:
    """Jet of ``J(u) = (-1)^n det [[u, u_bbar], [u_a, u_{a bbar}]]``."""
    j = _jet_of(u, z0, extra_order + 2)
    return det_jet(_bordered(j)) * (-1) ** j.n


def j_operator(u, z0=None) -> float:
    return as_real(j_operator_jet(u, z0, 0).value, "J(u)")


# ---------------------------------------------------------------------------
# Monge-Ampere residuals


def ma_residual(u, z0=None, c: float = 1.0) -> float:
    """Signed residual ``det(u_{i jbar}) - c e^u`` at ``z0``."""
    j = _jet_of(u, z0, 2)
    det = as_real(np.linalg.det(complex_hessian(j)), "det u_{i jbar}")
    return det - c * math.exp(as_real(j.value, "u"))


def leading_block_det(u, z0=None, size: int = 2) -> float:
    """Determinant of the leading ``size x size`` block of ``u_{i jbar}``."""
    h = complex_hessian(u, z0)
    return as_real(np.linalg.det(h[:size, :size]), "block determinant")


@dataclass(frozen=True)
class MAReport:
    hessian_det: float
    block_det: float
    rhs: float
    residual: float


def ma_report(u, z0=None, c: float = 1.0, block: int = 2) -> MAReport:
    j = _jet_of(u, z0, 2)
    h = complex_hessian(j)
    det = as_real(np.linalg.det(h), "det u_{i jbar}")
    blk = as_real(np.linalg.det(h[:block, :block]), "block determinant")
    rhs = c * math.exp(as_real(j.value, "u"))
    return MAReport(hessian_det=det, block_det=blk, rhs=rhs, residual=det - rhs)


@dataclass(frozen=True)
class IdentityResidual:
    lhs: float
    rhs: float

    @property
    def absolute(self) -> float:
        return self.lhs - self.rhs

    @property
    def relative(self) -> float:
        return abs(self.lhs - self.rhs) / abs(self.lhs) if self.lhs else math.inf


def kernel_ma_identity(k, z0=None, n: int | None = None) -> IdentityResidual:
    """Compare ``J(K)`` with ``(-1)^n C_n K^{n+2}``, ``C_n = (n+1)^n pi^n / n!``."""
    kj = _jet_of(k, z0, 2)
    n = kj.n if n is None else n
    kval = as_real(kj.value, "kernel value")
    if kval <= 0:
        raise NonpositiveKernel(f"kernel value {kval} is not positive")
    lhs = j_operator(kj)
    rhs = (-1) ** n * einstein_constant(n) * kval ** (n + 2)
    return IdentityResidual(lhs=lhs, rhs=rhs)


# ---------------------------------------------------------------------------
# boundary asymptotics


@dataclass(frozen=True)
class AsymptoticFit:
    """``value ~ A s^{-p} (1 + B s^q)`` with ``s = 1 - t^2``.

    ``q`` is ``inf`` (and ``B`` zero) when no correction is detectable above
    the noise floor.
    """

    A: float
    p: float
    B: float
    q: float
    A_err: float
    p_err: float
    q_err: float
    n_samples: int

    @property
    def correction_detected(self) -> bool:
        return math.isfinite(self.q)


NOISE_FLOOR = 1e-11


def _linear_fit(x, y):
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = max(len(x) - 2, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return coef, np.sqrt(np.diag(cov)), resid


def asymptotic_fit(samples) -> AsymptoticFit:
    """Fit the boundary blow-up model to ``(t, value)`` samples along a ray."""
    samples = sorted((float(t), float(v)) for t, v in samples)
    if len(samples) < 8:
        raise InsufficientSamples(f"need >= 8 samples, got {len(samples)}")
    t = np.array([p[0] for p in samples])
    v = np.array([p[1] for p in samples])
    if np.any(~np.isfinite(v)) or np.any(v <= 0) or np.any((t <= 0) | (t >= 1)):
        raise DegenerateFit("samples must have 0 < t < 1 and finite positive values")
    s = 1 - t**2
    ls, lv = np.log(s), np.log(v)
    if np.ptp(lv) < 1e-12 * (1 + np.max(np.abs(lv))):
        raise DegenerateFit("values are constant along the ray")

    # stage 1: pure power law on the half nearest the boundary
    near = np.argsort(s)[: max(4, len(s) // 2)]
    coef, err, _ = _linear_fit(ls[near], lv[near])
    logA, p = coef[0], -coef[1]
    rel = lv - (logA - p * ls)
    if np.max(np.abs(rel)) < NOISE_FLOOR * (1 + np.max(np.abs(lv))):
        coef, err, _ = _linear_fit(ls, lv)
        A = math.exp(coef[0])
        return AsymptoticFit(A, -coef[1], 0.0, math.inf, A * err[0], err[1], math.nan, len(s))

    # stage 2: correction exponent from the relative deviation, then joint fit
    mask = np.abs(rel) > 1e3 * NOISE_FLOOR
    if mask.sum() >= 2:
        c2, _, _ = _linear_fit(ls[mask], np.log(np.abs(rel[mask])))
        q0 = max(float(c2[1]), 0.1)
        B0 = math.copysign(math.exp(c2[0]), rel[mask][np.argmax(s[mask])])
    else:
        q0, B0 = 2.0, float(rel[np.argmax(s)]) / float(np.max(s)) ** 2

    def residuals(theta):
        la, pp, b, q = theta
        corr = b * s**q
        corr = np.maximum(corr, -1 + 1e-12)
        return la - pp * ls + np.log1p(corr) - lv

    fit = optimize.least_squares(
        residuals, [logA, p, B0, q0], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    la, p, B, q = fit.x
    dof = max(len(s) - 4, 1)
    s2 = float(fit.fun @ fit.fun) / dof
    JtJ = fit.jac.T @ fit.jac
    try:
        cov = s2 * np.linalg.inv(JtJ)
        errs = np.sqrt(np.abs(np.diag(cov)))
    except np.linalg.LinAlgError:
        errs = np.full(4, math.inf)
    A = math.exp(la)
    if not np.all(np.isfinite(fit.x)):
        raise DegenerateFit("nonlinear fit diverged")
    return AsymptoticFit(A, p, B, q, A * errs[0], errs[1], errs[3], len(s))
