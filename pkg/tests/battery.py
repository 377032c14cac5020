"""Standard field battery: each field is written once against an ``ops``
namespace so it can be evaluated both as jets and with plain numpy."""

import math
from types import SimpleNamespace

import numpy as np

from bergman.jets import coordinate_jets, jet_exp, jet_log, jet_pow

JET_OPS = SimpleNamespace(log=jet_log, exp=jet_exp, pow=jet_pow)
NP_OPS = SimpleNamespace(log=np.log, exp=np.exp, pow=lambda x, p: x**p)


def _nsq(zs, zb):
    total = zs[0] * zb[0]
    for a, b in zip(zs[1:], zb[1:]):
        total = total + a * b
    return total


def _ball_k(zs, zb, ops, n):
    return ops.pow(1 - _nsq(zs, zb), -(n + 1)) * (math.factorial(n) / math.pi**n)


def _quotient_k(zs, zb, ops, n, k):
    # cyclic group generated by diag(w, ..., w), determinant w^n
    total = None
    for m in range(k):
        w = complex(math.cos(2 * math.pi * m / k), math.sin(2 * math.pi * m / k))
        dot = zs[0] * zb[0] * w
        for a, b in zip(zs[1:], zb[1:]):
            dot = dot + a * b * w
        term = ops.pow(1 - dot, -(n + 1)) * (w**n)
        total = term if total is None else total + term
    return total * (math.factorial(n) / math.pi**n / k)


FIELDS = [
    ("log_ball_1", 1, lambda zs, zb, o: o.log(_ball_k(zs, zb, o, 1))),
    ("log_ball_2", 2, lambda zs, zb, o: o.log(_ball_k(zs, zb, o, 2))),
    ("log_ball_3", 3, lambda zs, zb, o: o.log(_ball_k(zs, zb, o, 3))),
    ("ball_kernel_2", 2, lambda zs, zb, o: _ball_k(zs, zb, o, 2)),
    ("ball_kernel_3", 3, lambda zs, zb, o: _ball_k(zs, zb, o, 3)),
    ("disc_quotient_3", 1, lambda zs, zb, o: _quotient_k(zs, zb, o, 1, 3)),
    ("log_b2_z2", 2, lambda zs, zb, o: o.log(_quotient_k(zs, zb, o, 2, 2) + 0.05)),
    ("log_b2_z3", 2, lambda zs, zb, o: o.log(_quotient_k(zs, zb, o, 2, 3))),
    ("quartic", 1, lambda zs, zb, o: (zs[0] * zb[0]) ** 2),
    ("power_15", 2, lambda zs, zb, o: o.pow(1 + _nsq(zs, zb), 1.5)),
    ("exp_mixed", 2, lambda zs, zb, o: o.exp((zs[0] + zb[0]) * zs[1] * zb[1])),
    ("log_hermitian", 2, lambda zs, zb, o: o.log(1 + zs[0] * zb[0] + (zs[0] * zb[1] + zs[1] * zb[0]) * 0.3)),
    ("rational", 2, lambda zs, zb, o: 1 / (2 - zs[0] * zb[1] - zs[1] * zb[0])),
    ("perturbed_r", 2, lambda zs, zb, o: (1 - _nsq(zs, zb)) * o.exp((zs[0] + zb[0]) * 0.05)),
    (
        "generic_r",
        2,
        lambda zs, zb, o: (1 - _nsq(zs, zb))
        * o.exp((zs[0] * zb[0] + (zs[0] * zs[0] + zb[0] * zb[0]) * 0.5 + (zs[0] * zb[1] + zs[1] * zb[0]) * 0.5) * 0.1),
    ),
    ("complex_valued", 2, lambda zs, zb, o: o.exp(zs[0] * zs[1] * 0.5 + zb[0] * 0.2j) * (1 + zb[1] * zb[1])),
    ("holomorphic", 3, lambda zs, zb, o: o.exp(zs[0] * zs[1] + zs[2])),
    ("root", 3, lambda zs, zb, o: o.pow(2 - _nsq(zs, zb), -1 / 3)),
    ("log_sum", 3, lambda zs, zb, o: o.log(1 + zs[0] * zb[0]) + o.log(2 + zs[1] * zb[1] * zs[2] * zb[2])),
    ("mixed_poly", 3, lambda zs, zb, o: zs[0] * zb[1] * zs[2] + zb[0] * zs[1] * zb[2] + _nsq(zs, zb) ** 3),
    ("potential_b3", 3, lambda zs, zb, o: o.log(_quotient_k(zs, zb, o, 3, 2) + 0.01)),
    ("exp_norm", 1, lambda zs, zb, o: o.exp(zs[0] * zb[0] * 2) * (zs[0] + zb[0])),
]


def jet_of(build, n, z0, order):
    zs, zb = coordinate_jets(z0, order)
    return build(zs, zb, JET_OPS)


def numpy_fn(build, n):
    def f(z):
        z = np.asarray(z, dtype=np.complex128)
        return build(list(z), list(np.conj(z)), NP_OPS)

    return f


def battery_points(n, count=10, seed=7, rmax=0.8):
    rng = np.random.default_rng(seed + n)
    out = []
    for _ in range(count):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        out.append(rng.uniform(0.05, rmax) * v)
    return out
