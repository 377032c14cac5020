"""One entry point per experiment kind, all returning a DiagnosticsReport."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..exceptions import BergmanError, ConfigError, NumericConsistencyError
from ..fdoracle import fd_hessian, fd_j_operator
from ..fefferman import (
    DefiningField,
    ball_defining_field,
    bergman_defining_field,
    boundary_order_fit,
    fefferman_chain,
    perturbed_ball_defining_field,
)
from ..geometry import (
    as_real,
    asymptotic_fit,
    einstein_constant,
    einstein_diagnostics,
    j_operator,
    kernel_ma_identity,
    ma_constant,
    ma_report,
    metric,
    metric_det,
)
from ..groups import validate
from ..jets import jet_exp
from ..kernels import ExpressionField, norm_squared
from .config import ExperimentConfig, sample_points
from .report import DiagnosticsReport, Row


def worker_count() -> int:
    raw = os.environ.get("BERGMAN_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        k = 1
    if k <= 0:
        k = os.cpu_count() or 1
    return k


def _map_rows(fn, items) -> list[Row]:
    """Evaluate rows, possibly concurrently; errors are captured per row."""

    def safe(arg):
        index, payload = arg
        try:
            return fn(index, payload)
        except BergmanError as exc:
            t, z = payload if isinstance(payload, tuple) else (None, None)
            return Row(
                index=index,
                point=None if z is None else np.asarray(z, dtype=np.complex128),
                quantities={} if t is None else {"t": float(t)},
                error=f"{type(exc).__name__}: {exc}",
                error_kind=(
                    "numeric-consistency" if isinstance(exc, NumericConsistencyError)
                    else "domain"
                ),
            )

    items = list(enumerate(items))
    k = worker_count()
    if k == 1 or len(items) < 2:
        rows = [safe(x) for x in items]
    else:
        with ThreadPoolExecutor(max_workers=k) as pool:
            rows = list(pool.map(safe, items))
    return sorted(rows, key=lambda r: r.index)


def _verdict(ok: bool | None) -> str:
    if ok is None:
        return "INDETERMINATE"
    return "PASS" if ok else "FAIL"


def _base_summary(rows: list[Row]) -> dict:
    errors = [r for r in rows if r.error is not None]
    return {
        "n_rows": len(rows),
        "n_errors": len(errors),
        "numeric_consistency_errors": sum(r.error_kind == "numeric-consistency" for r in errors),
    }


def _max_residual(rows, key):
    vals = [abs(r.residuals[key]) for r in rows if key in r.residuals]
    return max(vals) if vals else None


def _cross_check_metric(u, z, g) -> float:
    h = fd_hessian(u.value, z)
    return float(np.max(np.abs(h - g)) / max(np.max(np.abs(g)), 1e-300))


# ---------------------------------------------------------------------------


def _einstein(cfg: ExperimentConfig) -> tuple[list[Row], dict]:
    spec = cfg.kernel_spec()
    k = spec.kernel()
    u = spec.potential()
    const = einstein_constant(cfg.dimension)

    def row(i, payload):
        t, z = payload
        d = einstein_diagnostics(u, z, kernel=k)
        q = {"det_g": d.G, "b_invariant": d.b_invariant, "b_ratio": d.b_invariant / const}
        if t is not None:
            q["t"] = float(t)
        if cfg.cross_check:
            q["fd_metric_rel_err"] = _cross_check_metric(u, z, d.g)
        return Row(i, np.asarray(z), q, {"einstein": d.residual_norm})

    rows = _map_rows(row, sample_points(cfg))
    summary = _base_summary(rows)
    worst = _max_residual(rows, "einstein")
    summary["max_residual"] = worst
    ok = None if not rows else (summary["n_errors"] == 0 and worst is not None and worst < cfg.tol)
    summary["verdict"] = _verdict(ok)
    return rows, summary


def _ma(cfg: ExperimentConfig) -> tuple[list[Row], dict]:
    spec = cfg.kernel_spec()
    u = spec.potential()
    c = cfg.ma_constant if cfg.ma_constant is not None else ma_constant(
        cfg.dimension, spec.group.order
    )
    block = min(2, cfg.dimension)

    def row(i, payload):
        t, z = payload
        r = ma_report(u, z, c, block=block)
        q = {"det_hessian": r.hessian_det, "rhs": r.rhs, "block_det": r.block_det}
        if t is not None:
            q["t"] = float(t)
        if cfg.cross_check:
            q["fd_metric_rel_err"] = _cross_check_metric(u, z, metric(u, z))
        res = {
            "ma_absolute": r.residual,
            "ma_relative": abs(r.residual) / abs(r.rhs),
            # absolute where the right-hand side is small, relative where it blows up
            "ma_scaled": abs(r.residual) / max(1.0, abs(r.rhs)),
        }
        return Row(i, np.asarray(z), q, res)

    rows = _map_rows(row, sample_points(cfg))
    summary = _base_summary(rows)
    summary["ma_constant"] = c
    summary["max_residual"] = _max_residual(rows, "ma_scaled")
    summary["max_abs_residual"] = _max_residual(rows, "ma_absolute")
    summary["max_rel_residual"] = _max_residual(rows, "ma_relative")
    worst = summary["max_residual"]
    ok = None if not rows else (summary["n_errors"] == 0 and worst is not None and worst < cfg.tol)
    summary["verdict"] = _verdict(ok)
    return rows, summary


def _b_limit(cfg: ExperimentConfig) -> tuple[list[Row], dict]:
    spec = cfg.kernel_spec()
    k = spec.kernel()
    u = spec.potential()
    const = einstein_constant(cfg.dimension)

    def row(i, payload):
        t, z = payload
        kval = as_real(k.value(z), "kernel value")
        G = as_real(metric_det(u, z).value, "det g")
        b = G / (k.group_order * kval)
        q = {"b_invariant": b, "b_ratio": b / const, "det_g": G}
        if t is not None:
            q["t"] = float(t)
        return Row(i, np.asarray(z), q, {"b_ratio_minus_one": b / const - 1})

    rows = _map_rows(row, sample_points(cfg))
    summary = _base_summary(rows)
    good = [r for r in rows if r.error is None]
    if good:
        last = max(good, key=lambda r: float(np.linalg.norm(r.point)))
        summary["boundary_deviation"] = abs(last.residuals["b_ratio_minus_one"])
        ok = summary["boundary_deviation"] < cfg.tol and summary["n_errors"] == 0
    else:
        ok = None
    if cfg.sampling["type"] == "ray" and len(good) >= 8:
        try:
            fit = asymptotic_fit([(r.quantities["t"], r.quantities["det_g"]) for r in good])
            summary["det_g_fit"] = {
                "A": fit.A, "A_err": fit.A_err, "p": fit.p, "p_err": fit.p_err,
                "B": fit.B, "q": fit.q, "q_err": fit.q_err,
                "expected_p": cfg.dimension + 1,
                "expected_A": float((cfg.dimension + 1) ** cfg.dimension),
            }
        except BergmanError as exc:
            summary["det_g_fit"] = {"error": str(exc)}
    summary["verdict"] = _verdict(ok)
    return rows, summary


def _kernel_identity(cfg: ExperimentConfig) -> tuple[list[Row], dict]:
    spec = cfg.kernel_spec()
    k = spec.kernel()

    def row(i, payload):
        t, z = payload
        res = kernel_ma_identity(k, z)
        q = {"j_kernel": res.lhs, "rhs": res.rhs}
        if t is not None:
            q["t"] = float(t)
        if cfg.cross_check:
            fd = fd_j_operator(k.value, z)
            q["fd_j_rel_err"] = abs(fd - res.lhs) / abs(res.lhs)
        return Row(i, np.asarray(z), q, {"identity_relative": res.relative})

    rows = _map_rows(row, sample_points(cfg))
    summary = _base_summary(rows)
    worst = _max_residual(rows, "identity_relative")
    summary["max_residual"] = worst
    ok = None if not rows else (summary["n_errors"] == 0 and worst < cfg.tol)
    summary["verdict"] = _verdict(ok)
    return rows, summary


def generic_defining_field(n: int, eps: float = 0.1) -> DefiningField:
    """``(1 - |z|^2) exp(eps (|z1|^2 + Re(z1 zbar2) + Re z1^2))``: not a
    holomorphic rescaling of the ball, so the recursion does real work."""

    def build(zs, zb):
        expo = zs[0] * zb[0] + (zs[0] * zs[0] + zb[0] * zb[0]) * 0.5
        if n >= 2:
            expo = expo + (zs[0] * zb[1] + zs[1] * zb[0]) * 0.5
        return (1 - norm_squared(zs, zb)) * jet_exp(expo * eps)

    return DefiningField(ExpressionField(n, build, name=f"generic_r(n={n}, eps={eps})"))


def seed_from_config(cfg: ExperimentConfig):
    s = cfg.seed_field
    n = cfg.dimension
    if s["type"] == "ball":
        return ball_defining_field(n)
    if s["type"] == "perturbed-ball":
        return perturbed_ball_defining_field(n, float(s.get("epsilon", 0.1)))
    if s["type"] == "generic":
        return generic_defining_field(n, float(s.get("epsilon", 0.1)))
    return bergman_defining_field(cfg.kernel_spec().kernel(), n)


def _fefferman(cfg: ExperimentConfig) -> tuple[list[Row], dict]:
    n = cfg.dimension
    r = seed_from_config(cfg)
    chain = fefferman_chain(r, n, eval_order=2)
    ref = ball_defining_field(n)

    def row(i, payload):
        t, z = payload
        q = {"reference_r": as_real(ref.value(z), "r")}
        if t is not None:
            q["t"] = float(t)
        res = {f"j_u{s}_minus_one": j_operator(u, z) - 1 for s, u in enumerate(chain, 1)}
        return Row(i, np.asarray(z), q, res)

    points = sample_points(cfg)
    rows = _map_rows(row, points)
    summary = _base_summary(rows)
    orders = {}
    ok = summary["n_errors"] == 0
    if cfg.sampling["type"] == "ray":
        d = np.array([complex(re, im) for re, im in cfg.sampling["direction"]])
        for s, u in enumerate(chain, 1):
            try:
                fit = boundary_order_fit(u, d, cfg.sampling["radii"], ref)
            except BergmanError as exc:
                orders[f"u{s}"] = {"status": "indeterminate", "error": str(exc)}
                ok = False
                continue
            passed = fit.status == "exact" or fit.slope >= s - cfg.tol
            orders[f"u{s}"] = {
                "order": fit.slope, "stderr": fit.stderr, "status": fit.status,
                "expected_min": s, "pass": passed,
            }
            ok = ok and passed
    else:
        ok = None
    summary["orders"] = orders
    summary["verdict"] = _verdict(ok if rows else None)
    return rows, summary


def _group_validate(cfg: ExperimentConfig) -> tuple[list[Row], dict]:
    report = validate(cfg.build_group())
    rows = [
        Row(i, None, {"check": name, "passed": passed}, {"defect": defect})
        for i, (name, passed, defect) in enumerate(report.checks())
    ]
    summary = _base_summary(rows)
    summary["order"] = report.order
    summary["failed_checks"] = [name for name, passed, _ in report.checks() if not passed]
    summary["verdict"] = _verdict(report.ok)
    return rows, summary


RUNNERS = {
    "einstein-check": _einstein,
    "ma-check": _ma,
    "b-limit": _b_limit,
    "fefferman": _fefferman,
    "kernel-identity": _kernel_identity,
    "group-validate": _group_validate,
}


def required_jet_order(cfg: ExperimentConfig) -> int:
    """Highest jet order any evaluation in the run asks of the base field."""
    if cfg.experiment == "einstein-check":
        return 4
    if cfg.experiment == "fefferman":
        return 2 + 2 * (cfg.dimension + 1)
    if cfg.experiment == "group-validate":
        return 0
    return 2


def run(cfg: ExperimentConfig) -> DiagnosticsReport:
    """Run one experiment; deterministic for a fixed config."""
    need = required_jet_order(cfg)
    if need > cfg.jet_order:
        raise ConfigError("jet_order", f"{cfg.experiment} needs jets of order {need}, cap is {cfg.jet_order}")
    start = time.perf_counter()
    rows, summary = RUNNERS[cfg.experiment](cfg)
    for key, val in list(summary.items()):
        if isinstance(val, float) and not math.isfinite(val):
            summary[key] = None
    return DiagnosticsReport(
        config=cfg.to_dict(), rows=rows, summary=summary,
        wall_time=time.perf_counter() - start,
    )
