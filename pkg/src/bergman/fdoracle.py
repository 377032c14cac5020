"""Finite-difference Wirtinger derivatives, independent of the jet machinery.

Used only by tests and the harness ``--cross-check`` columns.  Derivatives
are taken in the ``2n`` real coordinates ``x_i = Re z_i``, ``y_i = Im z_i``
and recombined with ``d/dz = (d/dx - i d/dy)/2``, ``d/dzbar = (d/dx + i d/dy)/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import BergmanError, EvaluationFailed


@dataclass(frozen=True)
class FDConfig:
    h: float = 1e-4
    scheme: str = "central"
    richardson_levels: int = 2

    def __post_init__(self):
        if not 1e-8 <= self.h <= 1e-2:
            raise ValueError(f"step h={self.h} outside [1e-8, 1e-2]")
        if self.scheme != "central":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        if self.richardson_levels < 0:
            raise ValueError("richardson_levels must be >= 0")


DEFAULT = FDConfig()
# second differences lose ~eps/h^2 to roundoff; Richardson wants a wider base step
SECOND_ORDER = FDConfig(h=1e-3)


def _step(z0: np.ndarray, cfg: FDConfig, scale_to_ball: bool) -> float:
    if not scale_to_ball:
        return cfg.h
    # keep stencils inside the unit ball
    return cfg.h * min(1.0, 1.0 - float(np.linalg.norm(z0)))


def _evaluator(f: Callable, z0: np.ndarray):
    def ev(dz):
        try:
            return complex(f(z0 + dz))
        except BergmanError as exc:
            raise EvaluationFailed(f"stencil point {z0 + dz} failed: {exc}") from exc

    return ev


def _richardson(estimate: Callable[[float], complex], h: float, levels: int) -> complex:
    """Extrapolate an ``O(h^2)`` estimate by repeated step halving."""
    table = [estimate(h / 2**k) for k in range(levels + 1)]
    for lev in range(1, levels + 1):
        factor = 4**lev
        table = [
            (factor * table[k + 1] - table[k]) / (factor - 1) for k in range(len(table) - 1)
        ]
    return table[0]


def _unit(n, i, imag):
    e = np.zeros(n, dtype=np.complex128)
    e[i] = 1j if imag else 1
    return e


def fd_gradient(
    f: Callable, z0, i: int, config: FDConfig = DEFAULT, *, scale_to_ball: bool = True
) -> complex:
    """``df/dz_i`` at ``z0`` by central differences (``i`` zero-based)."""
    z0 = np.asarray(z0, dtype=np.complex128)
    ev = _evaluator(f, z0)
    ex, ey = _unit(len(z0), i, False), _unit(len(z0), i, True)

    def est(h):
        dx = (ev(h * ex) - ev(-h * ex)) / (2 * h)
        dy = (ev(h * ey) - ev(-h * ey)) / (2 * h)
        return 0.5 * (dx - 1j * dy)

    return _richardson(est, _step(z0, config, scale_to_ball), config.richardson_levels)


def fd_gradient_conj(
    f: Callable, z0, i: int, config: FDConfig = DEFAULT, *, scale_to_ball: bool = True
) -> complex:
    """``df/dzbar_i`` at ``z0``."""
    z0 = np.asarray(z0, dtype=np.complex128)
    ev = _evaluator(f, z0)
    ex, ey = _unit(len(z0), i, False), _unit(len(z0), i, True)

    def est(h):
        dx = (ev(h * ex) - ev(-h * ex)) / (2 * h)
        dy = (ev(h * ey) - ev(-h * ey)) / (2 * h)
        return 0.5 * (dx + 1j * dy)

    return _richardson(est, _step(z0, config, scale_to_ball), config.richardson_levels)


def _second(ev, a, b, h):
    """Central estimate of the second directional derivative along ``a``, ``b``."""
    if np.array_equal(a, b):
        return (ev(h * a) - 2 * ev(0 * a) + ev(-h * a)) / h**2
    return (
        ev(h * (a + b)) - ev(h * (a - b)) - ev(h * (b - a)) + ev(-h * (a + b))
    ) / (4 * h**2)


def fd_wirtinger(
    f: Callable, z0, i: int, j: int, config: FDConfig = SECOND_ORDER, *, scale_to_ball: bool = True
) -> complex:
    """``d^2 f / dz_i dzbar_j`` at ``z0`` (zero-based indices).

    ``(1/4) [f_{x_i x_j} + f_{y_i y_j} + i (f_{x_i y_j} - f_{y_i x_j})]``.
    """
    z0 = np.asarray(z0, dtype=np.complex128)
    n = len(z0)
    ev = _evaluator(f, z0)
    xi, yi = _unit(n, i, False), _unit(n, i, True)
    xj, yj = _unit(n, j, False), _unit(n, j, True)

    def est(h):
        fxx = _second(ev, xi, xj, h)
        fyy = _second(ev, yi, yj, h)
        fxy = _second(ev, xi, yj, h)
        fyx = _second(ev, yi, xj, h)
        return 0.25 * (fxx + fyy + 1j * (fxy - fyx))

    return _richardson(est, _step(z0, config, scale_to_ball), config.richardson_levels)


def fd_hessian(f: Callable, z0, config: FDConfig = SECOND_ORDER, **kw) -> np.ndarray:
    z0 = np.asarray(z0, dtype=np.complex128)
    n = len(z0)
    return np.array(
        [[fd_wirtinger(f, z0, i, j, config, **kw) for j in range(n)] for i in range(n)]
    )


def fd_j_operator(f: Callable, z0, config: FDConfig = SECOND_ORDER, **kw) -> float:
    """``J(f)`` with every derivative taken by finite differences."""
    z0 = np.asarray(z0, dtype=np.complex128)
    n = len(z0)
    m = np.empty((n + 1, n + 1), dtype=np.complex128)
    m[0, 0] = f(z0)
    for a in range(n):
        m[0, 1 + a] = fd_gradient_conj(f, z0, a, config, **kw)
        m[1 + a, 0] = fd_gradient(f, z0, a, config, **kw)
    m[1:, 1:] = fd_hessian(f, z0, config, **kw)
    return float(((-1) ** n * np.linalg.det(m)).real)
