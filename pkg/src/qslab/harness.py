"""Run orchestration: config validation, single runs, epsilon sweeps, rate fits.

A run steps the coupled system from well-prepared initial data to T_final,
enforcing the runtime invariants as hard per-step assertions:

* maximum principle  max |Q| <= c0,
* discrete divergence of the projected velocity <= 1e-10,
* total energy nonincreasing per step within 1e-8 relative slack,
* all fields finite.

Any violation aborts the run with a machine-readable failure record; the
partial CSV is retained with a FAILED marker row.  A sweep repeats the run
over the epsilon list (optionally in parallel processes), fits log-log decay
rates of the terminal diagnostics, and writes summary JSON plus combined CSV.
Outputs are deterministic: identical configs produce bit-identical CSVs.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    dissipation_increment,
    evaluate_snapshot,
)
from .errors import ConfigError, InvariantViolation
from .geometry import AnalyticInterface
from .grid import Grid2D, snapshot_dump
from .qspace import BulkParams, norm_sq
from .solver import SimState, build_initial, step, total_energy

__all__ = [
    "RunConfig",
    "RunResult",
    "FitResult",
    "SweepSummary",
    "default_config",
    "run_single",
    "sweep",
    "fit_rate",
]

ENERGY_SLACK = 1e-8
DIV_TOL = 1e-10


@dataclass
class RunConfig:
    """Sweep/run configuration; every field has a materialized default."""

    half_width: float = 1.0
    kind: str = "circle"
    center: tuple[float, float] = (0.0, 0.0)
    r0: float = 0.6
    y0: float = -0.5
    delta: float = 0.1
    eps_list: tuple[float, ...] = (0.08, 0.06, 0.04, 0.03)
    rho: float = 4.0
    dt_eps_div: float = 20.0
    dt_h_div: float = 4.0
    t_final: float = 0.1
    a: float = 3.0
    b: float = 9.0
    c: float = 1.0
    u0: tuple[float, float, float] = (0.0, 0.0, 1.0)
    snapshot_every: int = 20
    strip_cells: int = 8
    freeze_velocity: bool = False
    dump_fields: bool = False
    jobs: int = 1
    out_dir: str | None = None

    def params(self) -> BulkParams:
        return BulkParams(self.a, self.b, self.c)

    def interface(self) -> AnalyticInterface:
        return AnalyticInterface(
            self.kind, self.delta, tuple(self.center), self.r0, self.y0
        )

    def validate(self) -> list[str]:
        """Raise ConfigError on hard violations; return soft warnings."""
        warnings = []
        params = self.params()
        params.require_bistable()
        u0 = np.asarray(self.u0, dtype=float)
        if abs(u0 @ u0 - 1.0) > 1e-12:
            raise ConfigError("u0 must be a unit vector")
        if self.t_final <= 0:
            raise ConfigError("t_final must be positive")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")
        if not self.eps_list:
            raise ConfigError("eps_list must not be empty")
        if self.rho <= 0 or self.dt_eps_div <= 0 or self.dt_h_div <= 0:
            raise ConfigError("rho and dt rule divisors must be positive")
        for eps in self.eps_list:
            if eps <= 0:
                raise ConfigError("epsilon values must be positive")
            if self.delta <= eps:
                raise ConfigError(f"delta={self.delta} must exceed eps={eps}")
            if self.delta < 2.0 * eps:
                warnings.append(
                    f"delta={self.delta} < 2*eps={2 * eps}: transition layer tail "
                    "reaches beyond the xi support"
                )
        iface = self.interface()
        if self.kind == "circle":
            margin = (
                self.half_width
                - max(abs(self.center[0]), abs(self.center[1]))
                - self.r0
            )
            if margin < 3.0 * self.delta:
                raise ConfigError(
                    f"circle margin {margin:.4f} to the boundary is below 3*delta"
                )
            iface.radius(self.t_final)  # raises near extinction
        else:
            if self.half_width < 3.0 * self.delta:
                raise ConfigError("flat strip needs half-period >= 3*delta")
        return warnings

    def grid_for(self, eps: float) -> Grid2D:
        # cell counts rounded up to transform-friendly lengths (spectral
        # solves); h stays within ~1.5% of eps/rho
        from scipy.fft import next_fast_len

        target = eps / self.rho
        if self.kind == "circle":
            n = next_fast_len(max(2, int(round(2.0 * self.half_width / target))), real=True)
            return Grid2D.square(self.half_width, n, bc="dirichlet_zero")
        ny = next_fast_len(max(2, int(round(2.0 * self.half_width / target))), real=True)
        h = 2.0 * self.half_width / ny
        nx = max(2, self.strip_cells)
        return Grid2D(nx, ny, h, (-0.5 * nx * h, -self.half_width), bc="periodic")

    def dt_for(self, eps: float, h: float):
        dt_raw = min(eps * eps / self.dt_eps_div, h * h / self.dt_h_div)
        n_steps = max(1, math.ceil(self.t_final / dt_raw))
        return self.t_final / n_steps, n_steps

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f: data[f] for f in data if f in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**known)
        for name in ("center", "eps_list", "u0"):
            object.__setattr__(cfg, name, tuple(getattr(cfg, name)))
        return cfg

    @classmethod
    def from_json_file(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid config JSON: {exc}") from exc
        return cls.from_dict(data)


def default_config() -> RunConfig:
    return RunConfig()


@dataclass
class RunResult:
    eps: float
    h: float
    dt: float
    n_steps: int
    completed: bool
    failure: str | None
    records: list[DiagnosticsRecord]
    coercivity: list[dict]
    sup_kinetic: float
    max_energy_uptick: float
    clamp_total: int
    final_state: SimState | None = None

    @property
    def initial(self) -> DiagnosticsRecord:
        return self.records[0]

    @property
    def terminal(self) -> DiagnosticsRecord:
        return self.records[-1]


def _format_row(values) -> str:
    parts = []
    for v in values:
        parts.append(repr(int(v)) if isinstance(v, (int, np.integer)) else repr(float(v)))
    return ",".join(parts)


def write_run_csv(path, result: RunResult):
    lines = [",".join(CSV_COLUMNS)]
    lines += [_format_row(rec.row()) for rec in result.records]
    if not result.completed:
        lines.append(f"FAILED,{result.failure}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_coercivity_csv(path, result: RunResult):
    if not result.coercivity:
        return
    keys = list(result.coercivity[0].keys())
    lines = [",".join(["t"] + keys)]
    for rec, row in zip(result.records, result.coercivity):
        lines.append(_format_row([rec.t] + [row[k] for k in keys]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run_single(
    config: RunConfig,
    eps: float,
    out_dir: str | None = None,
    keep_state: bool = True,
) -> RunResult:
    """Step one epsilon from t = 0 to T_final, recording diagnostics."""
    config.validate()
    params = config.params()
    iface = config.interface()
    grid = config.grid_for(eps)
    dt, n_steps = config.dt_for(eps, grid.h)
    freeze = config.freeze_velocity

    Q0, u, v, p = build_initial(grid, iface, eps, params, config.u0)
    state = SimState(grid, 0.0, u, v, p, Q0, eps, params, dt)
    c0_run = max(params.c0, state.max_q())

    records: list[DiagnosticsRecord] = []
    coercivity: list[dict] = []
    diss_par = 0.0
    diss_tr = 0.0
    sup_kinetic = 0.0
    max_uptick = 0.0
    clamp_total = 0
    completed = True
    failure = None

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

    def snapshot():
        rec, coer = evaluate_snapshot(state, iface, diss_par, diss_tr)
        records.append(rec)
        coercivity.append(coer)
        return rec

    rec = snapshot()
    clamp_total += rec.clamp_count
    e_prev = None

    def check_energy(e_now, t_now):
        nonlocal e_prev, max_uptick
        if not np.isfinite(e_now):
            raise InvariantViolation(f"non-finite energy at t={t_now:.6g}")
        if e_prev is not None:
            uptick = (e_now - e_prev) / max(abs(e_prev), 1e-300)
            max_uptick = max(max_uptick, uptick)
            if uptick > ENERGY_SLACK:
                raise InvariantViolation(
                    f"energy increased by relative {uptick:.3e} at t={t_now:.6g}"
                )
        e_prev = e_now

    try:
        for n in range(n_steps):
            t_old = state.t
            u_old, v_old = state.u, state.v
            q_old, vcc_old, stats = step(state, freeze_velocity=freeze)
            # energy of the pre-step state, reusing the Laplacian from q_step
            kin, gl = total_energy(
                grid, u_old, v_old, q_old, eps, params, stats["lap_q_old"]
            )
            check_energy(kin + gl, t_old)
            sup_kinetic = max(sup_kinetic, kin)

            d_par, d_tr = dissipation_increment(
                grid, q_old, state.Q, vcc_old, iface, t_old, eps, params, dt
            )
            diss_par += d_par
            diss_tr += d_tr

            max_q = state.max_q()
            if not max_q <= c0_run + 1e-9:
                raise InvariantViolation(
                    f"maximum principle violated at t={state.t:.6g}: "
                    f"max|Q|={max_q} > c0={c0_run}"
                )
            if not freeze:
                div = state.max_div()
                if not div <= DIV_TOL:
                    raise InvariantViolation(
                        f"projected velocity divergence {div:.3e} > {DIV_TOL} "
                        f"at t={state.t:.6g}"
                    )

            if (n + 1) % config.snapshot_every == 0 or n + 1 == n_steps:
                rec = snapshot()
                clamp_total += rec.clamp_count
                if out_dir and config.dump_fields:
                    snapshot_dump(
                        os.path.join(out_dir, f"q_{n + 1:07d}.qslf"), state.Q
                    )
        kin, gl = total_energy(grid, state.u, state.v, state.Q, eps, params)
        check_energy(kin + gl, state.t)
        sup_kinetic = max(sup_kinetic, kin)
    except InvariantViolation as exc:
        completed = False
        failure = str(exc)

    result = RunResult(
        eps=eps,
        h=grid.h,
        dt=dt,
        n_steps=n_steps,
        completed=completed,
        failure=failure,
        records=records,
        coercivity=coercivity,
        sup_kinetic=sup_kinetic,
        max_energy_uptick=max_uptick,
        clamp_total=clamp_total,
        final_state=state if keep_state else None,
    )
    if out_dir:
        write_run_csv(os.path.join(out_dir, "run.csv"), result)
        write_coercivity_csv(os.path.join(out_dir, "coercivity.csv"), result)
    if not completed:
        raise InvariantViolation(failure or "run failed", result)
    return result


@dataclass
class FitResult:
    slope: float
    intercept: float
    r2: float
    stderr: float
    ci95: float
    n_used: int


def fit_rate(pairs) -> FitResult:
    """Ordinary least squares of log(value) against log(eps)."""
    pairs = list(pairs)
    clean = [(e, v) for e, v in pairs if v > 0.0]
    dropped = len(pairs) - len(clean)
    if dropped:
        import warnings as _w

        _w.warn(f"fit_rate: excluded {dropped} nonpositive values")
    if len(clean) < 2:
        raise ConfigError("fit_rate needs at least two positive data points")
    x = np.log([e for e, _ in clean])
    y = np.log([v for _, v in clean])
    n = len(x)
    sxx = float(np.sum((x - x.mean()) ** 2))
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    if n > 2:
        stderr = math.sqrt(ss_res / (n - 2) / sxx)
        from scipy.stats import t as student_t

        ci95 = float(student_t.ppf(0.975, n - 2)) * stderr
    else:
        stderr = 0.0
        ci95 = 0.0
    return FitResult(slope, intercept, r2, stderr, ci95, n)


@dataclass
class SweepSummary:
    config: RunConfig
    warnings: list[str]
    per_eps: list[dict]
    fits: dict
    flags: dict
    failed: bool = False

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "warnings": self.warnings,
            "per_eps": self.per_eps,
            "fits": {k: asdict(v) for k, v in self.fits.items()},
            "flags": self.flags,
            "failed": self.failed,
        }


def _coercivity_flags(result: RunResult) -> tuple[bool, float]:
    """Check the proven per-snapshot bounds; return (ok, max ratio to E)."""
    ok = True
    worst = 0.0
    bounded_by_e = (
        "energy_excess",
        "equipartition_defect",
        "transverse_gradient",
        "alignment_defect",
    )
    for row in result.coercivity:
        e_val = row["E"]
        scale = max(e_val, 1e-300)
        for key in bounded_by_e + ("normal_defect", "distance_weighted"):
            val = row[key]
            if val < -1e-12:
                ok = False
            worst = max(worst, val / scale)
            limit = {"normal_defect": 2.0, "distance_weighted": 10.0}.get(key, 1.0)
            if val > limit * e_val * (1.0 + 1e-9) + 1e-12:
                ok = False
        if row["lipschitz_excess"] > 1e-10:
            ok = False
    return ok, worst


def _nonneg_flags(result: RunResult) -> bool:
    return all(r.E >= -1e-12 and r.E_vol >= -1e-12 for r in result.records)


def _run_worker(args):
    config, eps, run_dir = args
    return run_single(config, eps, out_dir=run_dir, keep_state=False)


def sweep(config: RunConfig, out_dir: str | None = None) -> SweepSummary:
    """Run every epsilon, fit decay rates, and assemble the summary."""
    warnings = config.validate()
    if len(config.eps_list) < 3:
        raise ConfigError("a sweep needs at least 3 epsilon values")
    out_dir = out_dir or config.out_dir
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "config.json"), "w") as fh:
            fh.write(config.to_json() + "\n")

    def run_dir(eps):
        return os.path.join(out_dir, f"eps_{eps:g}") if out_dir else None

    jobs = max(1, int(config.jobs))
    cap = os.environ.get("QSL_THREADS")
    if cap:
        jobs = min(jobs, max(1, int(cap)))
    tasks = [(config, eps, run_dir(eps)) for eps in config.eps_list]
    results: list[RunResult | None] = [None] * len(tasks)
    failures: list[str] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_worker, t) for t in tasks]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except InvariantViolation as exc:
                    failures.append(f"eps={tasks[i][1]}: {exc.args[0]}")
                    if len(exc.args) > 1:
                        results[i] = exc.args[1]
    else:
        for i, task in enumerate(tasks):
            try:
                results[i] = _run_worker(task)
            except InvariantViolation as exc:
                failures.append(f"eps={task[1]}: {exc.args[0]}")
                if len(exc.args) > 1:
                    results[i] = exc.args[1]

    per_eps = []
    complete = [r for r in results if r is not None and r.completed]
    for r in results:
        if r is None:
            continue
        term = r.terminal
        init = r.initial
        entry = {
            "eps": r.eps,
            "h": r.h,
            "dt": r.dt,
            "n_steps": r.n_steps,
            "completed": r.completed,
            "failure": r.failure,
            "E0": init.E,
            "Evol0": init.E_vol,
            "E_T": term.E,
            "Evol_T": term.E_vol,
            "E_total_T": term.E + term.E_vol,
            "diss_parallel": term.diss_parallel_cum,
            "diss_transport": term.diss_transport_cum,
            "sup_kinetic": r.sup_kinetic,
            "max_energy_uptick": r.max_energy_uptick,
            "R_measured_T": term.R_measured,
            "clamp_total": r.clamp_total,
        }
        if config.kind == "circle":
            entry["R_exact_T"] = config.interface().radius(config.t_final)
            entry["radius_error"] = abs(term.R_measured - entry["R_exact_T"])
        per_eps.append(entry)

    fits = {}
    if len(complete) >= 3:
        fits["E_total"] = fit_rate([(r.eps, r.terminal.E + r.terminal.E_vol) for r in complete])
        fits["diss_parallel"] = fit_rate(
            [(r.eps, r.terminal.diss_parallel_cum) for r in complete]
        )
        fits["diss_transport"] = fit_rate(
            [(r.eps, r.terminal.diss_transport_cum) for r in complete]
        )

    flags = _acceptance_flags(config, results, fits, failures)
    summary = SweepSummary(config, warnings, per_eps, fits, flags, failed=bool(failures))

    if out_dir:
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        _write_combined_csv(os.path.join(out_dir, "combined.csv"), results)
    return summary


def _write_combined_csv(path, results):
    lines = [",".join(("eps",) + CSV_COLUMNS)]
    for r in results:
        if r is None:
            continue
        for rec in r.records:
            lines.append(_format_row([r.eps] + rec.row()))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _ratio_band(values) -> float:
    vals = [v for v in values if np.isfinite(v)]
    if not vals or min(vals) <= 0:
        return float("inf")
    return max(vals) / min(vals)


def _acceptance_flags(config, results, fits, failures) -> dict:
    complete = [r for r in results if r is not None and r.completed]
    all_done = not failures and len(complete) == len(config.eps_list)
    flags = {
        "all_runs_completed": all_done,
        "max_principle": all_done,
        "energy_monotone": all_done
        and all(r.max_energy_uptick <= ENERGY_SLACK for r in complete),
    }
    if complete:
        flags["well_prepared_E"] = _ratio_band([r.initial.E / r.eps for r in complete]) < 2.0
        flags["well_prepared_Evol"] = (
            _ratio_band([r.initial.E_vol / r.eps for r in complete]) < 2.0
        )
        kin_ratio = [2.0 * r.sup_kinetic / r.eps for r in complete]
        med = float(np.median(kin_ratio))
        flags["velocity_smallness"] = med >= 0.0 and all(
            k <= 3.0 * med and (med <= 3.0 * k or med == 0.0) for k in kin_ratio
        )
        coer = [_coercivity_flags(r) for r in complete]
        flags["coercivity"] = all(ok for ok, _ in coer)
        flags["coercivity_max_ratio"] = max(w for _, w in coer)
        flags["nonnegativity"] = all(_nonneg_flags(r) for r in complete)
        if config.kind == "circle":
            r_exact = config.interface().radius(config.t_final)
            flags["radius_tracking"] = all(
                abs(r.terminal.R_measured - r_exact) <= 5.0 * (r.eps + r.h)
                for r in complete
            )
    if "E_total" in fits:
        flags["slope_E_total"] = fits["E_total"].slope
        flags["convergence_slope"] = 0.7 <= fits["E_total"].slope <= 1.6
        flags["dissipation_slopes"] = (
            fits["diss_parallel"].slope >= 0.7 and fits["diss_transport"].slope >= 0.7
        )
    return flags
