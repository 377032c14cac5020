"""Truncated multivariate Taylor jets in the Wirtinger variables.

A jet of a scalar field ``f`` at ``z0`` stores the Taylor coefficients of
``f(z0 + zeta, conj(z0) + omega)`` in the ``2n`` formal variables
``(zeta_1..zeta_n, omega_1..omega_n)``, treating the holomorphic and
antiholomorphic directions as independent.  Mixed Wirtinger derivatives are
read off as ``alpha! beta! * coeff(alpha, beta)``.

Coefficients live in a dense vector indexed by a graded enumeration of
monomials, so truncating to a lower order is a prefix slice.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exceptions import (
    JetError,
    NonpositiveConstantTerm,
    OrderCapExceeded,
    VanishingConstantTerm,
)

MAX_ORDER = 12

__all__ = [
    "MAX_ORDER",
    "Jet",
    "jet_const",
    "jet_coordinate",
    "coordinate_jets",
    "add",
    "sub",
    "mul",
    "scale",
    "reciprocal",
    "jet_log",
    "jet_exp",
    "jet_pow",
    "extract_deriv",
    "partial_shift",
    "derivative",
    "det_jet",
    "linear_substitution",
    "gradient_jets",
    "hessian_jets",
]


# ---------------------------------------------------------------------------
# monomial bookkeeping (cached per (nvars, order))


@lru_cache(maxsize=None)
def _degree_block(nvars: int, degree: int) -> np.ndarray:
    rows = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for v in combo:
            e[v] += 1
        rows.append(e)
    return np.array(rows, dtype=np.int64).reshape(-1, nvars)


@lru_cache(maxsize=None)
def _exponents(nvars: int, order: int) -> np.ndarray:
    out = np.concatenate([_degree_block(nvars, k) for k in range(order + 1)])
    out.flags.writeable = False
    return out


def _size(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


def _keys(exps: np.ndarray, base: int) -> np.ndarray:
    weights = base ** np.arange(exps.shape[1], dtype=np.int64)
    return exps @ weights


@lru_cache(maxsize=None)
def _lookup(nvars: int, order: int):
    exps = _exponents(nvars, order)
    keys = _keys(exps, order + 1)
    perm = np.argsort(keys)
    return keys[perm], perm


def _index_of(nvars: int, order: int, exps: np.ndarray) -> np.ndarray:
    sorted_keys, perm = _lookup(nvars, order)
    keys = _keys(np.asarray(exps, dtype=np.int64).reshape(-1, nvars), order + 1)
    pos = np.searchsorted(sorted_keys, keys)
    return perm[pos]


@lru_cache(maxsize=None)
def _mul_table(nvars: int, order: int):
    exps = _exponents(nvars, order)
    degs = exps.sum(axis=1)
    left, right = [], []
    for a in range(len(exps)):
        nb = _size(nvars, order - degs[a])
        left.append(np.full(nb, a, dtype=np.int64))
        right.append(np.arange(nb, dtype=np.int64))
    left = np.concatenate(left)
    right = np.concatenate(right)
    target = _index_of(nvars, order, exps[left] + exps[right])
    perm = np.argsort(target, kind="stable")
    target = target[perm]
    starts = np.flatnonzero(np.r_[True, target[1:] != target[:-1]])
    return left[perm], right[perm], starts


@lru_cache(maxsize=None)
def _shift_table(nvars: int, order: int, shift: tuple):
    shift_arr = np.array(shift, dtype=np.int64)
    new_order = order - int(shift_arr.sum())
    exps = _exponents(nvars, new_order)
    src = _index_of(nvars, order, exps + shift_arr)
    factor = np.ones(len(exps))
    for v, s in enumerate(shift):
        for k in range(1, s + 1):
            factor = factor * (exps[:, v] + k)
    return src, factor


def _check_order(order: int) -> None:
    if order < 0:
        raise JetError(f"jet order must be non-negative, got {order}")
    if order > MAX_ORDER:
        raise OrderCapExceeded(f"jet order {order} exceeds the cap {MAX_ORDER}")


# ---------------------------------------------------------------------------


class Jet:
    """Immutable truncated power series in ``nvars`` variables.

    Parameters
    ----------
    coeffs : array_like
        Dense coefficient vector in graded monomial order, length
        ``comb(nvars + order, order)``.
    nvars : int
        Number of formal variables (``2n`` for fields on ``C^n``).
    order : int
        Truncation degree.
    """

    __slots__ = ("coeffs", "nvars", "order")
    __array_priority__ = 1000  # keep numpy scalars from broadcasting over us

    def __init__(self, coeffs, nvars: int, order: int):
        _check_order(order)
        if nvars < 1:
            raise JetError("nvars must be positive")
        c = np.asarray(coeffs)
        if not np.iscomplexobj(c):
            c = c.astype(np.result_type(c.dtype, np.complex128))
        if c.shape != (_size(nvars, order),):
            raise JetError(
                f"expected {_size(nvars, order)} coefficients, got shape {c.shape}"
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "order", order)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @property
    def n(self) -> int:
        return self.nvars // 2

    @property
    def dtype(self):
        return self.coeffs.dtype

    @property
    def value(self) -> complex:
        return self.coeffs[0]

    def exponents(self) -> np.ndarray:
        return _exponents(self.nvars, self.order)

    def coeff(self, alpha: Sequence[int], beta: Sequence[int] = ()) -> complex:
        """Raw Taylor coefficient of ``zeta**alpha * omega**beta``."""
        e = self._multi_index(alpha, beta)
        if e.sum() > self.order:
            return self.coeffs.dtype.type(0)
        return self.coeffs[_index_of(self.nvars, self.order, e)[0]]

    def _multi_index(self, alpha, beta) -> np.ndarray:
        e = np.zeros(self.nvars, dtype=np.int64)
        alpha = list(alpha)
        beta = list(beta)
        # a lone full-length alpha is an exponent over all 2n variables
        if not beta and len(alpha) == self.nvars:
            e[:] = alpha
        elif len(alpha) <= self.n and len(beta) <= self.n:
            e[: len(alpha)] = alpha
            e[self.n : self.n + len(beta)] = beta
        else:
            raise JetError("multi-index does not match the number of variables")
        if (e < 0).any():
            raise JetError("multi-index entries must be non-negative")
        return e

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise JetError(f"cannot raise jet order from {self.order} to {order}")
        return Jet(self.coeffs[: _size(self.nvars, order)], self.nvars, order)

    def astype(self, dtype) -> Jet:
        return Jet(self.coeffs.astype(dtype), self.nvars, self.order)

    def conj_swap(self) -> Jet:
        """Jet of ``conj(f)``: conjugate coefficients and swap zeta/omega."""
        n = self.n
        exps = self.exponents()
        swapped = np.concatenate([exps[:, n:], exps[:, :n]], axis=1)
        idx = _index_of(self.nvars, self.order, swapped)
        return Jet(np.conj(self.coeffs[idx]), self.nvars, self.order)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> Jet | None:
        if isinstance(other, Jet):
            if other.nvars != self.nvars or other.order != self.order:
                raise JetError(
                    f"jet mismatch: (nvars={self.nvars}, order={self.order}) vs "
                    f"(nvars={other.nvars}, order={other.order})"
                )
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is not None:
            return Jet(self.coeffs + o.coeffs, self.nvars, self.order)
        if np.ndim(other) != 0:
            return NotImplemented
        c = self.coeffs.copy()
        c[0] += other
        return Jet(c, self.nvars, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.nvars, self.order)

    def __sub__(self, other):
        if np.ndim(other) != 0 and not isinstance(other, Jet):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if np.ndim(other) != 0:
                return NotImplemented
            return Jet(self.coeffs * other, self.nvars, self.order)
        left, right, starts = _mul_table(self.nvars, self.order)
        prod = self.coeffs[left] * o.coeffs[right]
        return Jet(np.add.reduceat(prod, starts), self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        if np.ndim(other) != 0:
            return NotImplemented
        return Jet(self.coeffs / other, self.nvars, self.order)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        return jet_pow(self, p)

    def __repr__(self):
        nz = np.count_nonzero(self.coeffs)
        return (
            f"Jet(nvars={self.nvars}, order={self.order}, value={self.value!r}, "
            f"nonzero={nz})"
        )

    def allclose(self, other: Jet, atol: float = 1e-12, rtol: float = 0.0) -> bool:
        self._coerce(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=rtol))


# ---------------------------------------------------------------------------
# constructors


def jet_const(c, nvars: int, order: int, dtype=np.complex128) -> Jet:
    _check_order(order)
    coeffs = np.zeros(_size(nvars, order), dtype=dtype)
    coeffs[0] = c
    return Jet(coeffs, nvars, order)


def _variable(nvars: int, order: int, v: int, base, dtype) -> Jet:
    coeffs = np.zeros(_size(nvars, order), dtype=dtype)
    coeffs[0] = base
    if order >= 1:
        coeffs[1 + v] = 1  # degree-1 block is ordered by variable
    return Jet(coeffs, nvars, order)


def jet_coordinate(z0, i: int, kind: str, order: int, dtype=np.complex128) -> Jet:
    """Jet of the coordinate ``z_i`` (``kind="holomorphic"``) or ``conj(z_i)``.

    ``i`` is zero-based.
    """
    z0 = np.atleast_1d(np.asarray(z0, dtype=dtype))
    n = z0.shape[0]
    if not 0 <= i < n:
        raise JetError(f"coordinate index {i} out of range for n={n}")
    _check_order(order)
    if kind == "holomorphic":
        return _variable(2 * n, order, i, z0[i], dtype)
    if kind == "antiholomorphic":
        return _variable(2 * n, order, n + i, np.conj(z0[i]), dtype)
    raise JetError(f"kind must be 'holomorphic' or 'antiholomorphic', got {kind!r}")


def coordinate_jets(z0, order: int, dtype=np.complex128):
    """Return ``(zs, zbars)``: jets of every ``z_i`` and ``conj(z_i)`` at ``z0``."""
    z0 = np.atleast_1d(np.asarray(z0, dtype=dtype))
    n = z0.shape[0]
    zs = [jet_coordinate(z0, i, "holomorphic", order, dtype) for i in range(n)]
    zbars = [jet_coordinate(z0, i, "antiholomorphic", order, dtype) for i in range(n)]
    return zs, zbars


# ---------------------------------------------------------------------------
# ring operations as functions


def add(a: Jet, b: Jet) -> Jet:
    return a + b


def sub(a: Jet, b: Jet) -> Jet:
    return a - b


def mul(a: Jet, b: Jet) -> Jet:
    if not isinstance(b, Jet):
        raise JetError("mul expects two jets; use scale for scalars")
    return a * b


def scale(c, a: Jet) -> Jet:
    return a * c


# ---------------------------------------------------------------------------
# composition with scalar analytic functions


def _compose(f: Jet, series) -> Jet:
    """Horner evaluation of ``sum_k series[k] * h**k`` with ``h = f - f(0)``."""
    h = f - f.value
    out = jet_const(series[-1], f.nvars, f.order, dtype=f.dtype)
    for c in reversed(series[:-1]):
        out = h * out + c
    return out


def _scalar(f: Jet, x):
    return f.dtype.type(x)


def reciprocal(f: Jet) -> Jet:
    f0 = f.value
    if f0 == 0:
        raise VanishingConstantTerm("reciprocal of a jet with zero constant term")
    inv = _scalar(f, 1) / f0
    series = [inv]
    for _ in range(f.order):
        series.append(-series[-1] * inv)
    return _compose(f, series)


def _require_positive(f: Jet, what: str):
    if not f.value.real > 0:
        raise NonpositiveConstantTerm(
            f"{what} needs a constant term with positive real part, got {f.value}"
        )


def jet_log(f: Jet) -> Jet:
    _require_positive(f, "log")
    f0 = f.value
    inv = _scalar(f, 1) / f0
    series = [np.log(f0)]
    power = _scalar(f, 1)
    for k in range(1, f.order + 1):
        power = power * inv
        series.append((1 if k % 2 else -1) * power / k)
    return _compose(f, series)


def jet_exp(f: Jet) -> Jet:
    e0 = np.exp(f.value)
    series = [e0]
    for k in range(1, f.order + 1):
        series.append(series[-1] / k)
    return _compose(f, series)


def jet_pow(f: Jet, p) -> Jet:
    """``f**p``.

    Non-negative integer powers are plain products; negative integers only
    need a nonzero constant term; real ``p`` needs a positive real part.
    """
    if isinstance(p, (int, np.integer)) and p >= 0:
        p = int(p)
        out = jet_const(1, f.nvars, f.order, dtype=f.dtype)
        base = f
        while p:
            if p & 1:
                out = out * base
            p >>= 1
            if p:
                base = base * base
        return out
    if isinstance(p, (int, np.integer)):
        if f.value == 0:
            raise VanishingConstantTerm("negative power of a jet with zero constant term")
    else:
        _require_positive(f, "powf")
        p = float(p)
    f0 = f.value
    inv = _scalar(f, 1) / f0
    series = [f0**p]
    for k in range(1, f.order + 1):
        series.append(series[-1] * (p - k + 1) / k * inv)
    return _compose(f, series)


def linear_substitution(jets: Sequence[Jet], matrix) -> list[Jet]:
    """Jets of ``(A x)_i`` given the jets of ``x``; used for ``z -> gamma z``."""
    a = np.asarray(matrix)
    proto = jets[0]
    stacked = np.stack([j.coeffs for j in jets])
    mixed = a.astype(np.result_type(a.dtype, stacked.dtype)) @ stacked
    return [Jet(row, proto.nvars, proto.order) for row in mixed]


# ---------------------------------------------------------------------------
# derivatives


def _factorial_weight(e) -> int:
    return math.prod(math.factorial(int(x)) for x in e)


def extract_deriv(f: Jet, alpha: Sequence[int] = (), beta: Sequence[int] = ()) -> complex:
    """``d^{|alpha|+|beta|} f / dz^alpha dzbar^beta`` at the base point."""
    e = f._multi_index(alpha, beta)
    if e.sum() > f.order:
        raise JetError(f"derivative of order {e.sum()} exceeds jet order {f.order}")
    return f.coeff(e) * _factorial_weight(e)


def derivative(f: Jet, alpha: Sequence[int] = (), beta: Sequence[int] = ()) -> Jet:
    """Jet of ``d^alpha dbar^beta f``, of order ``f.order - |alpha| - |beta|``."""
    e = f._multi_index(alpha, beta)
    k = int(e.sum())
    if k > f.order:
        raise JetError(f"cannot differentiate {k} times a jet of order {f.order}")
    if k == 0:
        return f
    src, factor = _shift_table(f.nvars, f.order, tuple(int(x) for x in e))
    return Jet(f.coeffs[src] * factor, f.nvars, f.order - k)


def partial_shift(f: Jet, i: int, j: int) -> Jet:
    """Jet of ``d^2 f / dz_i dzbar_j`` (zero-based indices)."""
    n = f.n
    if not (0 <= i < n and 0 <= j < n):
        raise JetError(f"indices ({i}, {j}) out of range for n={n}")
    if f.order < 2:
        raise JetError("partial_shift needs a jet of order >= 2")
    e = [0] * f.nvars
    e[i] += 1
    e[n + j] += 1
    return derivative(f, e)


def gradient_jets(f: Jet):
    """``([f_{z_i}], [f_{zbar_j}])`` as jets of order ``f.order - 1``."""
    n = f.n
    hol, anti = [], []
    for i in range(n):
        e = [0] * f.nvars
        e[i] = 1
        hol.append(derivative(f, e))
        e = [0] * f.nvars
        e[n + i] = 1
        anti.append(derivative(f, e))
    return hol, anti


def hessian_jets(f: Jet):
    """n x n nested list of jets of ``f_{z_i zbar_j}``, order ``f.order - 2``."""
    n = f.n
    return [[partial_shift(f, i, j) for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# determinant over the jet ring


def det_jet(matrix) -> Jet:
    """Determinant of a square matrix of jets.

    Division-free: cofactor expansion memoised over column subsets, so no jet
    is ever inverted.  Entries may mix jets and scalars as long as at least one
    entry is a jet.
    """
    m = len(matrix)
    if m == 0 or any(len(row) != m for row in matrix):
        raise JetError("det_jet expects a non-empty square matrix")
    proto = next((x for row in matrix for x in row if isinstance(x, Jet)), None)
    if proto is None:
        raise JetError("det_jet expects at least one Jet entry")
    for row in matrix:
        for x in row:
            if isinstance(x, Jet):
                proto._coerce(x)

    memo: dict[int, Jet] = {}

    def minor(row: int, used: int) -> Jet:
        if row == m:
            return jet_const(1, proto.nvars, proto.order, dtype=proto.dtype)
        if used in memo:
            return memo[used]
        total = None
        sign = 1
        for col in range(m):
            if used & (1 << col):
                continue
            entry = matrix[row][col]
            term = minor(row + 1, used | (1 << col)) * entry
            total = term * sign if total is None else total + term * sign
            sign = -sign
        memo[used] = total
        return total

    return minor(0, 0)
