"""Fefferman's recursive construction of an approximate solution of J(u) = 1.

Starting from a defining function ``r`` (``r > 0`` inside, ``dr != 0`` on the
boundary)::

    u1 = r / J(r)^(1/(n+1))
    us = u_{s-1} * (1 + (1 - J(u_{s-1})) / ((n + 2 - s) s)),   2 <= s <= n+1

and ``J(us) - 1`` vanishes to order ``s`` at the boundary.  Each application
of J eats two jet orders, which is tracked by :attr:`ScalarField.cost`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    IndeterminateFit,
    InsufficientSamples,
    NonpositiveConstantTerm,
    NonpositiveJ,
    NonpositiveKernel,
    OrderCapExceeded,
)
from .geometry import as_real, j_operator, j_operator_jet
from .jets import MAX_ORDER, jet_exp, jet_pow
from .kernels import ExpressionField, ScalarField, check_point, norm_squared

CENSOR_LEVEL = 1e-13


def _check_budget(f: ScalarField, order: int) -> None:
    if order + f.cost > MAX_ORDER:
        raise OrderCapExceeded(
            f"{f.name} at order {order} needs seed jets of order {order + f.cost} "
            f"(cap {MAX_ORDER})"
        )


class DefiningField(ScalarField):
    """A defining function: positive inside, with nonvanishing gradient near
    the boundary.

    ``interior_point`` is a point where ``r > 0`` is known to hold.
    """

    def __init__(self, base: ScalarField, interior_point=None, name: str | None = None):
        self.base = base
        self.n = base.n
        self.cost = base.cost
        self.in_ball = base.in_ball
        self.name = name or base.name
        z = np.zeros(self.n) if interior_point is None else interior_point
        self.interior_point = check_point(z, self.n, in_ball=self.in_ball)

    def _jet(self, z, order, dtype):
        return self.base._jet(z, order, dtype)

    def check(self, z0) -> None:
        """Raise ``ValueError`` unless ``r(z0) > 0`` and ``|grad r(z0)| > 1e-8``."""
        j = self.jet(z0, 1)
        if not as_real(j.value, "r") > 0:
            raise ValueError(f"defining function is not positive at {z0}")
        grad = np.abs(j.coeffs[1 : 1 + self.n])
        if not np.sqrt(np.sum(grad**2)) > 1e-8:
            raise ValueError(f"defining function has vanishing gradient at {z0}")


def ball_defining_field(n: int) -> DefiningField:
    """``r = 1 - |z|^2``, for which ``J(r) = 1`` identically."""
    base = ExpressionField(n, lambda zs, zb: 1 - norm_squared(zs, zb), name=f"ball_r(n={n})")
    return DefiningField(base)


def perturbed_ball_defining_field(n: int, eps: float = 0.1) -> DefiningField:
    """``r = (1 - |z|^2) exp(eps Re z_1)``: same zero set as the ball, ``J(r) != 1``."""

    def build(zs, zb):
        re_z1 = (zs[0] + zb[0]) * 0.5
        return (1 - norm_squared(zs, zb)) * jet_exp(re_z1 * eps)

    base = ExpressionField(n, build, name=f"perturbed_ball_r(n={n}, eps={eps})")
    return DefiningField(base)


def scaled_field(f: ScalarField, lam: float) -> ScalarField:
    """``lam * f``."""
    out = _Scaled(f, lam)
    return out


class _Scaled(ScalarField):
    def __init__(self, f, lam):
        self.f, self.lam = f, lam
        self.n, self.cost, self.in_ball = f.n, f.cost, f.in_ball
        self.name = f"{lam}*{f.name}"

    def _jet(self, z, order, dtype):
        return self.f._jet(z, order, dtype) * self.lam


class FeffermanSeed(ScalarField):
    """``u1 = r J(r)^(-1/(n+1))``."""

    def __init__(self, r: ScalarField, n: int | None = None):
        self.r = r
        self.n = r.n if n is None else n
        if self.n != r.n:
            raise ValueError(f"seed dimension {r.n} does not match n={self.n}")
        self.cost = r.cost + 2
        self.in_ball = r.in_ball
        self.name = f"u1[{r.name}]"

    def jet(self, z0, order, dtype=np.complex128):
        _check_budget(self, order)
        return super().jet(z0, order, dtype)

    def _jet(self, z, order, dtype):
        rj = self.r._jet(z, order + 2, dtype)
        J = j_operator_jet(rj, extra_order=order)
        if not as_real(J.value, "J(r)") > 0:
            raise NonpositiveJ(f"J(r) = {complex(J.value).real:.6g} <= 0 at {z}")
        return rj.truncate(order) * jet_pow(J, -1.0 / (self.n + 1))


class FeffermanStep(ScalarField):
    """``us = u_{s-1} (1 + (1 - J(u_{s-1})) / ((n + 2 - s) s))``."""

    def __init__(self, prev: ScalarField, s: int, n: int | None = None):
        self.prev = prev
        self.n = prev.n if n is None else n
        if not 2 <= s <= self.n + 1:
            raise ValueError(f"step index s={s} outside 2..{self.n + 1}")
        self.s = s
        self.denominator = (self.n + 2 - s) * s
        if self.denominator == 0:
            raise ZeroDivisionError("vanishing step denominator")
        self.cost = prev.cost + 2
        self.in_ball = prev.in_ball
        self.name = f"u{s}"

    def jet(self, z0, order, dtype=np.complex128):
        _check_budget(self, order)
        return super().jet(z0, order, dtype)

    def _jet(self, z, order, dtype):
        pj = self.prev._jet(z, order + 2, dtype)
        J = j_operator_jet(pj, extra_order=order)
        return pj.truncate(order) * (1 + (1 - J) / self.denominator)


def fefferman_seed(r: ScalarField, n: int | None = None) -> ScalarField:
    return FeffermanSeed(r, n)


def fefferman_step(prev: ScalarField, s: int, n: int | None = None) -> ScalarField:
    return FeffermanStep(prev, s, n)


def fefferman_chain(r: ScalarField, n: int | None = None, eval_order: int = 0):
    """``[u1, ..., u_{n+1}]``, after checking the jet budget for ``eval_order``."""
    n = r.n if n is None else n
    fields = [fefferman_seed(r, n)]
    for s in range(2, n + 2):
        fields.append(fefferman_step(fields[-1], s, n))
    _check_budget(fields[-1], eval_order)
    return fields


class _BergmanDefining(ScalarField):
    def __init__(self, k: ScalarField, n: int):
        self.k = k
        self.n = n
        self.cost = k.cost
        self.in_ball = k.in_ball
        self.scale = math.pi**n / math.factorial(n)
        self.name = f"r_F[{k.name}]"

    def _jet(self, z, order, dtype):
        kj = self.k._jet(z, order, dtype) * self.scale
        try:
            return jet_pow(kj, -1.0 / (self.n + 1))
        except NonpositiveConstantTerm:
            raise NonpositiveKernel(
                f"kernel value {complex(kj.value) / self.scale} at {z} is not positive"
            ) from None


def bergman_defining_field(k: ScalarField, n: int | None = None) -> ScalarField:
    """``(pi^n / n! * k)^(-1/(n+1))``."""
    return _BergmanDefining(k, k.n if n is None else n)


# ---------------------------------------------------------------------------


def default_radii(count: int = 10, start: float = 0.2) -> np.ndarray:
    """``t_k = 1 - start * 2^-k``."""
    return 1 - start * 2.0 ** -np.arange(count)


@dataclass(frozen=True)
class OrderFit:
    """Slope of ``log|J(u) - 1|`` against ``log r`` along a boundary ray.

    ``status`` is ``"fitted"`` or ``"exact"`` (every sample censored).
    """

    slope: float
    stderr: float
    status: str
    radii: tuple = field(default=())
    residuals: tuple = field(default=())
    reference: tuple = field(default=())

    @property
    def n_used(self) -> int:
        return sum(abs(x) >= CENSOR_LEVEL for x in self.residuals)


def boundary_order_fit(
    u: ScalarField, direction, radii=None, reference: ScalarField | None = None
) -> OrderFit:
    """Vanishing order of ``J(u) - 1`` measured in powers of ``reference``.

    ``reference`` defaults to the ball defining function ``1 - |z|^2``.
    """
    n = u.n
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    if len(radii) < 8:
        raise InsufficientSamples(f"need >= 8 radii, got {len(radii)}")
    d = np.asarray(direction, dtype=np.complex128)
    d = d / np.linalg.norm(d)
    if reference is None:
        reference = ball_defining_field(n)
    res, refs = [], []
    for t in radii:
        z = t * d
        res.append(j_operator(u, z) - 1)
        refs.append(as_real(reference.value(z), "reference r"))
    res = np.array(res)
    refs = np.array(refs)
    keep = np.abs(res) >= CENSOR_LEVEL
    common = dict(radii=tuple(radii), residuals=tuple(res), reference=tuple(refs))
    if keep.sum() == 0:
        return OrderFit(math.inf, 0.0, "exact", **common)
    if keep.sum() < 4:
        raise IndeterminateFit(f"only {int(keep.sum())} uncensored samples")
    x = np.log(refs[keep])
    y = np.log(np.abs(res[keep]))
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ coef
    s2 = float(r @ r) / max(len(x) - 2, 1)
    err = math.sqrt(s2 * np.linalg.inv(X.T @ X)[1, 1])
    return OrderFit(float(coef[1]), err, "fitted", **common)
