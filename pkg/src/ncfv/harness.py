"""Running configurations and builtin tests, with exact references and checks."""

from __future__ import annotations

import os
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import fan_cell_averages, generalized_rh_residual
from .errors import NcfvError, SolverFailure
from .io import ErrorTable, Snapshot, write_error_table, write_gnuplot, write_snapshot_csv
from .mesh import Grid1D, cell_average, init_from_function, init_from_riemann
from .models import make_system
from .models.burgers import smooth_solution
from .registry import get_test, initial_function
from .stepper import SchemeConfig, run

__all__ = [
    "VariantResult",
    "Check",
    "Report",
    "l1_error",
    "config_for_test",
    "build",
    "reference_for",
    "run_config",
    "convergence",
    "reproduce",
]


@dataclass
class VariantResult:
    """Outcome of one scheme variant on one grid."""

    variant: str
    cells: int
    grid: Grid1D
    snapshots: list
    max_err: float = np.nan
    l1: Optional[np.ndarray] = None
    exact: Optional[np.ndarray] = None
    seconds: float = 0.0
    steps: int = 0

    @property
    def final(self):
        return self.snapshots[-1][1].averages


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class Report:
    test: str
    results: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    files: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def l1_error(grid, U, ref):
    """``dx * sum_j |U_j - ref_j|`` per component."""
    return grid.dx * np.abs(np.asarray(U) - np.asarray(ref)).sum(axis=0)


def config_for_test(test_id, variant="O1_DisRec", cells=None):
    """RunConfig equivalent of a builtin test and variant."""
    from .config import RunConfig

    case = get_test(test_id)
    scheme = SchemeConfig.from_name(variant, base=case.base, cfl=case.cfl)
    init = ({"riemann": (case.left, case.right, case.x0)} if case.kind == "riemann"
            else {"function": case.function})
    return RunConfig(system=case.system, system_options=dict(case.system_options),
                     scheme=scheme, domain=case.domain, cells=int(cells or case.cells[0]),
                     t_end=case.t_end, initial=init, boundary=case.boundary,
                     snapshots=case.snapshots, test=test_id,
                     nquad=4 if case.function == "burgers.smooth" else 1)


def build(cfg, cells=None):
    """System, grid and initial field of a configuration."""
    system = make_system(cfg.system, **cfg.system_options)
    grid = Grid1D.from_bounds(cfg.domain[0], cfg.domain[1], int(cells or cfg.cells))
    if "riemann" in cfg.initial:
        left, right, x0 = cfg.initial["riemann"]
        f0 = init_from_riemann(grid, np.asarray(left, float), np.asarray(right, float), x0,
                               system, cfg.boundary)
    else:
        f0 = init_from_function(grid, initial_function(cfg.initial["function"]), system,
                                cfg.boundary, nquad=cfg.nquad)
    return system, grid, f0


def reference_for(cfg, system, f0) -> Optional[Callable]:
    """``ref(grid, t) -> averages`` when an exact solution is known, else ``None``."""
    if "riemann" in cfg.initial:
        left, right, x0 = cfg.initial["riemann"]
        try:
            fan = system.riemann(np.asarray(left, float), np.asarray(right, float))
            fan.validate(1e-9)
        except SolverFailure:
            return None
        return lambda grid, t: fan_cell_averages(fan, grid.edges, t, x0)
    name = cfg.initial["function"]
    if name == "burgers.stationary":
        # the discrete initial data are themselves the steady state
        return lambda grid, t: init_from_function(grid, initial_function(name)).averages
    if name == "burgers.smooth":
        u0 = initial_function(name)
        return lambda grid, t: cell_average(lambda x: smooth_solution(u0, x, t), grid, 4)
    return None


def run_config(cfg, cells=None, track=False, callback=None):
    """Run ``cfg`` and measure errors against the exact reference if there is one.

    With ``track`` the maximum pointwise error is taken over every step.
    """
    system, grid, f0 = build(cfg, cells)
    ref = reference_for(cfg, system, f0)
    res = VariantResult(cfg.scheme.name, grid.m, grid, [])
    worst = [0.0]

    def cb(field, rep):
        res.steps += 1
        if track and ref is not None:
            worst[0] = max(worst[0], float(np.max(np.abs(field.averages - ref(grid, field.time)))))
        if callback is not None:
            callback(field, rep)

    t0 = _time.perf_counter()
    res.snapshots = run(f0, cfg.scheme, system, cfg.t_end, cfg.snapshots, cb)
    res.seconds = _time.perf_counter() - t0
    if ref is not None:
        res.exact = ref(grid, cfg.t_end)
        res.l1 = l1_error(grid, res.final, res.exact)
        res.max_err = worst[0] if track else float(np.max(np.abs(res.final - res.exact)))
    return res


def _restrict(U, factor):
    return U.reshape(-1, factor, U.shape[1]).mean(axis=1)


def convergence(cfg, cells_list):
    """ErrorTable over ``cells_list``.

    The reference is the exact solution when known, otherwise a run of the
    same scheme on 8 times the finest grid averaged onto each grid.
    """
    cells_list = [int(c) for c in cells_list]
    system, _, f0 = build(cfg)
    ref = reference_for(cfg, system, f0)
    fine = None
    if ref is None:
        nf = 8 * max(cells_list)
        if any(nf % c for c in cells_list):
            raise ValueError("cell counts must divide 8 times the finest grid")
        fine = run_config(cfg, nf).final
    errs = []
    for c in cells_list:
        r = run_config(cfg, c)
        target = r.exact if ref is not None else _restrict(fine, (8 * max(cells_list)) // c)
        errs.append(l1_error(r.grid, r.final, target))
    return ErrorTable(cells_list, np.array(errs))


def _snapshot_of(res, t, field, ref):
    exact = ref(res.grid, t) if ref is not None else None
    return Snapshot(res.grid.centers, field.averages, exact, t)


def write_result(res, cfg, out_dir, prefix, system=None):
    """Write one CSV per snapshot; returns the paths."""
    system = system or make_system(cfg.system, **cfg.system_options)
    ref = reference_for(cfg, system, None)
    paths = []
    for t, fld in res.snapshots:
        path = os.path.join(out_dir, f"{prefix}_{res.variant}_N{res.cells}_t{t:g}.csv")
        write_snapshot_csv(_snapshot_of(res, t, fld, ref), path)
        paths.append(path)
    return paths


def _fmt_err(e):
    return "[" + ", ".join(f"{v:.3e}" for v in np.atleast_1d(e)) + "]"


def reproduce(test_id, out_dir="out", gnuplot=False, log=print):
    """Run every variant of a builtin test, write CSVs and evaluate its checks."""
    case = get_test(test_id)
    report = Report(test_id)
    results = {}
    for cells in case.cells:
        for variant in case.variants:
            cfg = config_for_test(test_id, variant, cells)
            try:
                res = run_config(cfg, track="isolated-shock" in case.checks)
            except NcfvError as exc:
                report.notes.append(f"{variant} N={cells}: {type(exc).__name__}: {exc}")
                log(f"  {variant:15s} N={cells:<6d} {type(exc).__name__}: {exc}")
                continue
            results[(variant, cells)] = res
            report.results.append(res)
            report.files += write_result(res, cfg, out_dir, test_id)
            msg = f"  {variant:15s} N={cells:<6d} steps={res.steps:<6d} {res.seconds:7.2f}s"
            if res.l1 is not None:
                msg += f"  L1={_fmt_err(res.l1)}  max={res.max_err:.3e}"
            log(msg)

    if case.reference_cells:
        _reference_errors(case, results, report, out_dir, log)
    if case.published_middle is not None:
        _middle_note(case, report, log)
    refine = None
    if case.refine:
        cfg = config_for_test(test_id, case.refine_variant)
        refine = convergence(cfg, case.refine)
        path = os.path.join(out_dir, f"{test_id}_{case.refine_variant}_errors.csv")
        write_error_table(refine, path)
        report.files.append(path)
        for c, e in zip(refine.cells, refine.errors):
            log(f"  refine {case.refine_variant} N={c:<6d} L1={_fmt_err(e)}")
    if "order" in case.checks:
        for variant in case.variants:
            cfg = config_for_test(test_id, variant)
            table = convergence(cfg, case.cells)
            path = os.path.join(out_dir, f"{test_id}_{variant}_errors.csv")
            write_error_table(table, path)
            report.files.append(path)
            results[("order", variant)] = table

    for name in case.checks:
        report.checks += CHECKS[name](case, results, refine)
    if gnuplot:
        _gnuplot(case, report, out_dir)
    return report


def _gnuplot(case, report, out_dir):
    system = make_system(case.system, **case.system_options)
    names = list(getattr(system, "names", [f"u{k + 1}" for k in range(system.n_vars)]))
    final = [p for p in report.files if p.endswith(f"_t{case.t_end:g}.csv")]
    for cells in case.cells:
        mine = [os.path.basename(p) for p in final if f"_N{cells}_" in p]
        if mine:
            path = os.path.join(out_dir, f"{case.id}_N{cells}.gp")
            write_gnuplot(path, mine, names, f"{case.title}, {cells} cells, t = {case.t_end:g}",
                          with_exact=case.kind == "riemann" or case.function is not None)
            report.files.append(path)


def _reference_errors(case, results, report, out_dir, log):
    cfg = config_for_test(case.id, "O1_DisRec", case.reference_cells)
    log(f"  reference O1_DisRec N={case.reference_cells} ...")
    ref = run_config(cfg)
    snaps = dict(ref.snapshots)
    for (variant, cells), res in results.items():
        if not isinstance(variant, str) or ref.cells % cells:
            continue
        factor = ref.cells // cells
        for t, fld in res.snapshots:
            target = _restrict(snaps[t].averages, factor)
            e = l1_error(res.grid, fld.averages, target)
            report.notes.append(f"{variant} N={cells} t={t:g}: L1 vs reference {_fmt_err(e)}")
            log(f"  {variant:15s} N={cells:<6d} t={t:<5g} L1 vs reference={_fmt_err(e)}")
            path = os.path.join(out_dir, f"{case.id}_{variant}_N{cells}_t{t:g}.csv")
            write_snapshot_csv(Snapshot(res.grid.centers, fld.averages, target, t), path)


def _middle_note(case, report, log):
    system = make_system(case.system, **case.system_options)
    uL, uR = np.asarray(case.left, float), np.asarray(case.right, float)
    mid = np.asarray(case.published_middle, float)
    sigma = (mid[1] - uL[1]) / (mid[0] - uL[0])
    res = generalized_rh_residual(system.path, system, uL, mid, sigma)
    lines = [f"published intermediate state {mid.tolist()}: jump-condition residual "
             f"against the left state {np.max(np.abs(res)):.3e}"]
    try:
        fan = system.riemann(uL, uR)
        states = [w.uR for w in fan.waves[:-1]]
        lines.append(f"computed intermediate state(s) {[s.tolist() for s in states]}, "
                     f"speeds {[float(w.speed) for w in fan.waves]}")
    except SolverFailure as exc:
        lines.append(f"own solver finds no admissible fan: {exc}")
    for line in lines:
        report.notes.append(line)
        log("  " + line)


def _get(results, variant, cells):
    return results.get((variant, cells))


def _check_isolated(case, results, refine):
    out = []
    cells = case.cells[0]
    for v in ("O1_DisRec", "O2_DisRec"):
        r = _get(results, v, cells)
        ok = r is not None and r.max_err <= 1e-10
        detail = "missing" if r is None else f"max error over steps {r.max_err:.3e} (<= 1e-10)"
        out.append(Check(f"isolated shock exact {v} N={cells}", ok, detail))
    return out


def _check_wrong_limit(case, results, refine):
    god, dis = _get(results, "O1_noDisRec", 1000), _get(results, "O1_DisRec", 1000)
    if god is None or dis is None:
        return [Check("wrong limit without reconstruction", False, "missing runs")]
    eg, ed = float(np.max(god.l1)), float(np.max(dis.l1))
    ok = eg >= 1e-2 and ed <= 1e-10 and eg >= 1e6 * max(ed, 1e-300)
    return [Check("wrong limit without reconstruction N=1000", ok,
                  f"noDisRec L1 {eg:.3e} (>= 1e-2), DisRec L1 {ed:.3e} (<= 1e-10)")]


def shock_position(grid, U, level):
    """First interface where the conserved sum crosses ``level`` from above."""
    s = U.sum(axis=1)
    idx = np.flatnonzero((s[:-1] >= level) & (s[1:] < level))
    if idx.size == 0:
        return np.nan
    j = idx[0]
    w = (s[j] - level) / (s[j] - s[j + 1])
    return grid.centers[j] + w * grid.dx


def _check_segment(case, results, refine):
    out = []
    sl, sr = sum(case.left), sum(case.right)
    xs = case.x0 + 0.5 * (sl + sr) * case.t_end
    for v in case.variants:
        r = _get(results, v, case.cells[0])
        if r is None:
            out.append(Check(f"segment path {v}", False, "missing"))
            continue
        pos = shock_position(r.grid, r.final, 0.5 * (sl + sr))
        e = float(np.max(r.l1))
        ok = abs(pos - xs) <= 2 * r.grid.dx and e <= 5e-3
        out.append(Check(f"segment path {v}", ok,
                         f"shock at {pos:.5f} vs {xs:.5f} (2 cells = {2 * r.grid.dx:.4f}), "
                         f"L1 {e:.3e} (<= 5e-3)"))
    return out


def _check_wb(case, results, refine):
    out = []
    for v in ("O1_DisRec", "O2_DisRec"):
        r = _get(results, v, case.cells[0])
        e = np.inf if r is None else float(np.max(r.l1))
        out.append(Check(f"well-balanced {v}", e <= 1e-12, f"L1 {e:.3e} (<= 1e-12)"))
    return out


def gas_shock_match(tol=1e-9):
    """Distance between the 3-shock of gas Test 2 and the shock of gas Test 1."""
    t1, t2 = get_test("gas.test1"), get_test("gas.test2")
    system = make_system("gas", **t1.system_options)
    f1 = system.riemann(np.asarray(t1.left), np.asarray(t1.right))
    f2 = system.riemann(np.asarray(t2.left), np.asarray(t2.right))
    s1, s2 = f1.shocks[-1], f2.shocks[-1]
    return max(float(np.max(np.abs(s1.uL - s2.uL))), float(np.max(np.abs(s1.uR - s2.uR))),
               abs(s1.speed - s2.speed))


def _check_gas(case, results, refine):
    d = gas_shock_match()
    out = [Check("3-shock equals the isolated shock", d <= 1e-9, f"distance {d:.3e} (<= 1e-9)")]
    n = case.cells[0]
    for v, want in (("O1_DisRec", "le"), ("O2_DisRec", "le"),
                    ("O1_noDisRec", "gt"), ("O2_noDisRec", "gt")):
        r = _get(results, v, n)
        e = np.inf if r is None or r.l1 is None else float(np.max(r.l1))
        if want == "le":
            out.append(Check(f"three-wave {v}", e <= 1e-8, f"L1 {e:.3e} (<= 1e-8)"))
        else:
            out.append(Check(f"three-wave {v}", e > 1e-2 and np.isfinite(e),
                             f"L1 {e:.3e} (> 1e-2)"))
    return out


def _check_msw_exact(case, results, refine):
    out = []
    for v in ("O1_ExactDisRec", "O2_ExactDisRec"):
        r = _get(results, v, case.cells[0])
        if r is None or r.l1 is None:
            out.append(Check(f"exact strategy {v}", False,
                             "no exact reference: the Riemann solver found no admissible fan"))
            continue
        e = float(np.max(r.l1))
        out.append(Check(f"exact strategy {v}", e <= 1e-9, f"L1 {e:.3e} (<= 1e-9)"))
    return out


def _check_refine(case, results, refine):
    e = refine.errors
    ok = bool(np.all(np.diff(e, axis=0) < 0))
    rows = "; ".join(f"{c}: {_fmt_err(r)}" for c, r in zip(refine.cells, e))
    return [Check(f"{case.refine_variant} errors strictly decrease", ok, rows)]


def _check_order(case, results, refine):
    out = []
    for v, lo, hi in (("O2_noDisRec", 1.8, np.inf), ("O1_noDisRec", 0.8, 1.2)):
        table = results.get(("order", v))
        orders = table.orders[1:]
        ok = bool(np.all((orders >= lo) & (orders <= hi)))
        out.append(Check(f"observed order {v}", ok,
                         f"orders {np.round(orders, 3).tolist()} in [{lo}, {hi}]"))
    return out


CHECKS = {
    "isolated-shock": _check_isolated,
    "wrong-limit": _check_wrong_limit,
    "segment-path": _check_segment,
    "well-balanced": _check_wb,
    "gas-three-wave": _check_gas,
    "msw-exact": _check_msw_exact,
    "msw-refine": _check_refine,
    "order": _check_order,
}
