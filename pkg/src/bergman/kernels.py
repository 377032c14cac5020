"""Bergman kernels of the unit ball and of finite ball quotients as jet fields.

A :class:`ScalarField` maps a base point ``z0`` and an order ``d`` to the
:class:`~bergman.jets.Jet` of the field at ``z0``.  Kernels here are
restricted to the diagonal ``w = z``, i.e. ``K(z, conj(z))``, with ``z`` and
``conj(z)`` expanded as independent directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import (
    GroupError,
    NonpositiveConstantTerm,
    NonpositiveKernel,
    PointOutsideBall,
)
from .groups import FiniteUnitaryGroup, trivial_group, validate
from .jets import Jet, coordinate_jets, jet_log, jet_pow, linear_substitution

BALL_MARGIN = 1e-6


def ball_constant(n: int) -> float:
    """``n! / pi^n``, the value of the ball kernel at the origin."""
    return math.factorial(n) / math.pi**n


def check_point(z0, n: int, *, in_ball: bool = True, dtype=np.complex128) -> np.ndarray:
    """Coerce ``z0`` to a length-``n`` complex vector and check the ball margin."""
    z = np.atleast_1d(np.asarray(z0, dtype=dtype))
    if z.shape != (n,):
        raise ValueError(f"expected a point in C^{n}, got shape {z.shape}")
    if not np.all(np.isfinite(z.astype(np.complex128))):
        raise ValueError("point has non-finite coordinates")
    if in_ball:
        radius = float(np.sqrt(np.sum(np.abs(z.astype(np.complex128)) ** 2)))
        if radius > 1 - BALL_MARGIN:
            raise PointOutsideBall(
                f"|z0| = {radius!r} is outside the evaluation region |z| <= 1 - {BALL_MARGIN}"
            )
    return z


class ScalarField:
    """Jet-evaluable scalar field on a domain of ``C^n``.

    Subclasses implement :meth:`_jet`.  ``cost`` is the number of extra jet
    orders consumed internally (two per nested application of the J operator).
    """

    n: int
    cost: int = 0
    # |Gamma| for quotient kernels: the quotient's own kernel is group_order * K
    group_order: int = 1
    in_ball: bool = True
    name: str = "field"

    def jet(self, z0, order: int, dtype=np.complex128) -> Jet:
        z = check_point(z0, self.n, in_ball=self.in_ball, dtype=dtype)
        return self._jet(z, order, dtype)

    def _jet(self, z, order, dtype) -> Jet:
        raise NotImplementedError

    def value(self, z0) -> complex:
        return complex(self.jet(z0, 0).value)

    __call__ = value

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} n={self.n}>"


class ExpressionField(ScalarField):
    """Field given by an expression in the coordinate jets ``(zs, zbars)``."""

    def __init__(
        self,
        n: int,
        build: Callable[[list, list], Jet],
        name: str = "expression",
        in_ball: bool = True,
    ):
        self.n = n
        self.build = build
        self.name = name
        self.in_ball = in_ball

    def _jet(self, z, order, dtype):
        zs, zbars = coordinate_jets(z, order, dtype=dtype)
        return self.build(zs, zbars)


def norm_squared(zs, zbars) -> Jet:
    out = zs[0] * zbars[0]
    for a, b in zip(zs[1:], zbars[1:]):
        out = out + a * b
    return out


def _ball_kernel_term(zs, zbars, n):
    return jet_pow(1 - norm_squared(zs, zbars), -(n + 1))


def ball_kernel(n: int) -> ScalarField:
    """``K(z, z) = (n!/pi^n) (1 - |z|^2)^{-(n+1)}`` on the unit ball."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    c = ball_constant(n)
    return ExpressionField(
        n, lambda zs, zb: _ball_kernel_term(zs, zb, n) * c, name=f"ball_kernel(n={n})"
    )


def _compensated_sum(jets: list[Jet]) -> Jet:
    """Kahan summation of jets, largest constant term first."""
    jets = sorted(jets, key=lambda j: -abs(complex(j.value)))
    total = np.zeros_like(jets[0].coeffs)
    comp = np.zeros_like(total)
    for j in jets:
        y = j.coeffs - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return Jet(total, jets[0].nvars, jets[0].order)


class QuotientKernel(ScalarField):
    """Averaged kernel ``(1/|G|) sum_g K(g z, conj(z)) det g``."""

    def __init__(self, group: FiniteUnitaryGroup, check: bool = True):
        if check:
            report = validate(group)
            if not report.ok:
                raise GroupError(f"group failed validation: {report}")
        self.group = group
        self.group_order = group.order
        self.n = group.dimension
        self.name = f"quotient_kernel(n={self.n}, |G|={group.order})"

    def _jet(self, z, order, dtype):
        n = self.n
        zs, zbars = coordinate_jets(z, order, dtype=dtype)
        terms = []
        for g, det in zip(self.group.elements, self.group.determinants):
            gz = linear_substitution(zs, g)
            terms.append(_ball_kernel_term(gz, zbars, n) * det)
        return _compensated_sum(terms) * (ball_constant(n) / self.group.order)


def quotient_kernel(group: FiniteUnitaryGroup) -> ScalarField:
    return QuotientKernel(group)


def disc_quotient_closed_form(r: int) -> ScalarField:
    """``(r/pi) |z|^{2(r-1)} / (1 - |z|^{2r})^2`` for the order-``r`` disc quotient."""
    if r < 1:
        raise ValueError("r must be >= 1")

    def build(zs, zb):
        x = zs[0] * zb[0]
        return jet_pow(x, r - 1) * jet_pow(1 - jet_pow(x, r), -2) * (r / math.pi)

    field = ExpressionField(1, build, name=f"disc_quotient_closed_form(r={r})")
    field.group_order = r
    return field


def b3_example_closed_form() -> ScalarField:
    """``(4!/pi^3) |z|^2 (1 + |z|^4) / (1 - |z|^4)^4`` for ``B^3 / {+-I}``."""

    def build(zs, zb):
        x = norm_squared(zs, zb)
        x2 = x * x
        return x * (1 + x2) * jet_pow(1 - x2, -4) * (24 / math.pi**3)

    field = ExpressionField(3, build, name="b3_example_closed_form")
    field.group_order = 2
    return field


class LogField(ScalarField):
    """``u = log k`` for a positive kernel field ``k``."""

    def __init__(self, kernel: ScalarField):
        self.kernel = kernel
        self.n = kernel.n
        self.cost = kernel.cost
        self.group_order = kernel.group_order
        self.in_ball = kernel.in_ball
        self.name = f"log({kernel.name})"

    def _jet(self, z, order, dtype):
        k = self.kernel._jet(z, order, dtype)
        try:
            return jet_log(k)
        except NonpositiveConstantTerm:
            raise NonpositiveKernel(
                f"kernel value {complex(k.value)} at {z} is not positive"
            ) from None


def log_field(k: ScalarField) -> ScalarField:
    return LogField(k)


def b3_example_potential() -> ScalarField:
    """``log K`` for ``B^3/{+-I}`` written as a sum of logarithms.

    ``log(4!/pi^3) + log|z|^2 + log(1 + |z|^4) - 4 log(1 - |z|^4)``; near the
    origin this avoids forming the vanishing product before taking its log.
    """

    def build(zs, zb):
        x = norm_squared(zs, zb)
        x2 = x * x
        try:
            lx = jet_log(x)
        except NonpositiveConstantTerm:
            raise NonpositiveKernel("the B^3/{+-I} kernel vanishes at the origin") from None
        return lx + jet_log(1 + x2) - 4 * jet_log(1 - x2) + math.log(24 / math.pi**3)

    field = ExpressionField(3, build, name="b3_example_potential")
    field.group_order = 2
    return field


# ---------------------------------------------------------------------------

VARIANTS = ("averaged", "closed-form-disc", "closed-form-b3-example")


def _is_b3_example(group: FiniteUnitaryGroup) -> bool:
    if group.dimension != 3 or group.order != 2:
        return False
    return group.find(np.eye(3)) is not None and group.find(-np.eye(3)) is not None


def _disc_order(group: FiniteUnitaryGroup) -> int | None:
    if group.dimension != 1:
        return None
    r = group.order
    roots = {k for k in range(r)}
    for g in group.elements:
        angle = np.angle(g[0, 0]) / (2 * np.pi) * r
        k = int(round(angle)) % r
        if abs(angle - round(angle)) > 1e-8 or abs(abs(g[0, 0]) - 1) > 1e-10:
            return None
        roots.discard(k)
    return r if not roots else None


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Which kernel to build: dimension, group and evaluation variant."""

    n: int
    group: FiniteUnitaryGroup | None = None
    variant: str = "averaged"

    def __post_init__(self):
        if self.group is None:
            object.__setattr__(self, "group", trivial_group(self.n))
        if self.group.dimension != self.n:
            raise ValueError(
                f"group dimension {self.group.dimension} does not match n={self.n}"
            )
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.variant == "closed-form-disc" and _disc_order(self.group) is None:
            raise ValueError("closed-form-disc needs n=1 and a cyclic rotation group")
        if self.variant == "closed-form-b3-example" and not _is_b3_example(self.group):
            raise ValueError("closed-form-b3-example needs n=3 and the group {I, -I}")

    def kernel(self) -> ScalarField:
        if self.variant == "closed-form-disc":
            return disc_quotient_closed_form(_disc_order(self.group))
        if self.variant == "closed-form-b3-example":
            return b3_example_closed_form()
        if self.group.is_trivial:
            return ball_kernel(self.n)
        return quotient_kernel(self.group)

    def potential(self) -> ScalarField:
        if self.variant == "closed-form-b3-example":
            return b3_example_potential()
        return log_field(self.kernel())
