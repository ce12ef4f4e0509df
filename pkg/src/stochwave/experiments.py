"""Monte Carlo convergence studies, method comparisons and report emission.

Strong-error protocol: every Monte Carlo sample owns one Brownian lattice at
the reference resolution tau_ref; the reference solution (high-frequency
recovered integrator at tau_ref) and every coarse run consume grouped
increments of that same lattice, so the measured quantity is the coupled
mean-square distance

    rms(tau) = sqrt( mean_s || U_tau,s(T) - U_ref,s(T) ||_0^2 )

in the L2 x H^-1 pair norm, with both states zero-padded to the wider band
(an isometry).  The initial state is built once, on the reference grid, and
restricted spectrally for each coarser run.

Orders are read off as the least-squares slope of log(rms) against
log(tau).  Samples whose run leaves the floating-point domain are excluded
and counted, never averaged; a study with more than 1% exclusions aborts.

Reports are deterministic: samples are keyed by (seed, sample_index), the
reduction runs in ascending sample order whatever the worker count, and the
convergence CSV carries no timing (its wall_seconds column is 0).  Measured
timings belong to the compare workflow, which writes them into its own CSV
and error-versus-time plot data.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .integrators import (
    MethodSpec,
    NumericalError,
    method_spec,
    run,
)
from .noise import sample_path
from .problems import (
    InitialDataSpec,
    ProblemSpec,
    build_initial,
    preset_problem,
)
from .spectral import (
    SpectralGrid,
    diff_norm,
    make_grid,
    save_snapshot,
    sobolev_norm,
    state_to_fields,
)

DESK_SAMPLES = 128
FULL_SAMPLES = 1000
MAX_EXCLUDED_FRACTION = 0.01


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class NumericalFailure(RuntimeError):
    """Too many excluded samples or an unusable reference."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int = 1
    preset: int | None = None
    problem: ProblemSpec | None = None
    gamma: float = 0.5
    methods: tuple[str, ...] = ("hr_lri",)
    levels: tuple[float, ...] = (2**-5, 2**-6, 2**-7, 2**-8, 2**-9)
    n_cuts: tuple[int, ...] | None = None
    alpha: float | None = None
    t_final: float = 0.25
    n_samples: int = DESK_SAMPLES
    seed: int = 0
    tau_ref: float | None = None
    out_dir: str = "out"
    n_workers: int = 1
    full_fidelity: bool = False
    tau: float | None = None
    sample_index: int = 0
    snapshot_stride: int = 0


def default_n_cut(tau: float) -> int:
    """The step-size coupling N = 1/(4 tau)."""
    n = int(round(1.0 / (4.0 * tau)))
    return max(n, 1)


def resolve_config(config: ExperimentConfig) -> ExperimentConfig:
    """Fill derived defaults and validate cross-field consistency."""
    if config.dim not in (1, 2):
        raise ConfigError(f"dim must be 1 or 2, got {config.dim}")
    levels = tuple(sorted((float(t) for t in config.levels), reverse=True))
    if not levels:
        raise ConfigError("at least one level is required")
    alpha = config.alpha
    if alpha is None:
        alpha = 2.0 if config.dim == 1 else 1.5
    tau_ref = config.tau_ref
    if tau_ref is None:
        tau_ref = levels[-1] / 4.0
    for tau in levels:
        r = tau / tau_ref
        if abs(r - round(r)) > 1e-9 or round(r) < 1:
            raise ConfigError(f"tau_ref {tau_ref} does not divide level {tau}")
        steps = config.t_final / tau
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError(f"level {tau} does not tile t_final {config.t_final}")
    n_cuts = config.n_cuts
    if n_cuts is None:
        n_cuts = tuple(default_n_cut(t) for t in levels)
    elif len(n_cuts) != len(levels):
        raise ConfigError("n_cuts must match levels one to one")
    methods = tuple(config.methods)
    for m in methods:
        if m not in ("hr_lri", "lri", "sem", "stm"):
            raise ConfigError(f"unknown method {m!r}")
    n_samples = FULL_SAMPLES if config.full_fidelity else config.n_samples
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    return replace(config, levels=levels, alpha=alpha, tau_ref=tau_ref,
                   n_cuts=n_cuts, methods=methods, n_samples=n_samples)


def study_problem(config: ExperimentConfig) -> tuple[int, ProblemSpec]:
    """The (dim, problem) pair the config describes."""
    if config.problem is not None:
        return config.dim, config.problem
    if config.preset is None:
        raise ConfigError("config needs either a preset or an explicit problem")
    dim, _, problem = preset_problem(config.preset, config.gamma, config.seed)
    if dim != config.dim:
        raise ConfigError(f"preset {config.preset} is {dim}-dimensional, config says {config.dim}")
    return dim, problem


# ---------------------------------------------------------------------------
# report containers


@dataclass(frozen=True)
class LevelRow:
    tau: float
    n_cut: int
    n_samples: int
    rms_error: float
    stderr: float
    excluded: int
    wall_seconds: float = 0.0


@dataclass(frozen=True)
class ConvergenceReport:
    method: str
    rows: tuple[LevelRow, ...]
    fitted_order: float | None


def estimate_order(rows) -> float:
    """Ordinary least-squares slope of log(rms) against log(tau).

    ``rows`` holds (tau, rms) pairs or LevelRow objects.  Returns None when
    every error vanishes (nothing to fit); raises on fewer than three usable
    rows.
    """
    pts = []
    for row in rows:
        tau, err = (row.tau, row.rms_error) if isinstance(row, LevelRow) else row
        if err > 0.0:
            pts.append((math.log(tau), math.log(err)))
    if not pts:
        return None
    if len(pts) < 3:
        raise ValueError(f"need at least 3 usable rows, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    xs_c = xs - xs.mean()
    return float(np.dot(xs_c, ys - ys.mean()) / np.dot(xs_c, xs_c))


def _aggregate(method: str, levels, n_cuts, err_sq: np.ndarray,
               wall: np.ndarray | None = None) -> ConvergenceReport:
    """Reduce the (sample, level) error-square matrix into a report."""
    rows = []
    for i, (tau, n_cut) in enumerate(zip(levels, n_cuts)):
        col = err_sq[:, i]
        good = col[np.isfinite(col)]
        excluded = col.shape[0] - good.shape[0]
        if good.shape[0] == 0:
            raise NumericalFailure(f"{method} at tau={tau}: every sample excluded")
        mean_sq = float(np.mean(good))
        rms = math.sqrt(mean_sq)
        if good.shape[0] > 1 and rms > 0.0:
            var_sq = float(np.var(good, ddof=1))
            stderr = math.sqrt(var_sq / good.shape[0]) / (2.0 * rms)
        else:
            stderr = 0.0
        rows.append(LevelRow(tau=tau, n_cut=n_cut, n_samples=good.shape[0],
                             rms_error=rms, stderr=stderr, excluded=excluded,
                             wall_seconds=float(wall[i]) if wall is not None else 0.0))
    try:
        order = estimate_order(rows)
    except ValueError:
        order = None
    return ConvergenceReport(method=method, rows=tuple(rows), fitted_order=order)


# ---------------------------------------------------------------------------
# convergence study


def _shared_initial(config: ExperimentConfig, problem: ProblemSpec,
                    ref_grid: SpectralGrid) -> ProblemSpec:
    """Pin one initial state, built on the reference grid, for every run."""
    u0 = build_initial(problem.initial, ref_grid)
    return ProblemSpec(problem.f, problem.sigma,
                       InitialDataSpec("explicit", state=u0))


def _one_sample(sample: int, config: ExperimentConfig, shared: ProblemSpec,
                ref_grid: SpectralGrid, ref_method: MethodSpec,
                grids, specs):
    """Errors (squared) and wall times for one coupled sample.

    Returns (err_sq, wall) arrays of shape (n_methods, n_levels); NaN marks
    an excluded run.
    """
    n_m = len(config.methods)
    n_l = len(config.levels)
    err_sq = np.full((n_m, n_l), np.nan)
    wall = np.zeros((n_m, n_l))
    lattice = sample_path(config.seed, sample, config.t_final, config.tau_ref)
    try:
        ref = run(ref_method, ref_grid, shared, lattice)
    except NumericalError:
        return err_sq, wall
    for mi in range(n_m):
        for li in range(n_l):
            try:
                res = run(specs[mi][li], grids[li], shared, lattice)
            except NumericalError:
                continue
            err = diff_norm(res.final_state, ref.final_state, 0.0)
            err_sq[mi, li] = err * err
            wall[mi, li] = res.wall_time
    return err_sq, wall


def run_convergence(config: ExperimentConfig,
                    collect_timing: bool = False) -> dict[str, ConvergenceReport]:
    """One coupled-path convergence study; a report per method."""
    config = resolve_config(config)
    dim, problem = study_problem(config)
    n_ref = default_n_cut(config.tau_ref)
    ref_grid = make_grid(dim, n_ref, config.alpha)
    ref_method = method_spec("hr_lri", config.tau_ref, config.t_final)
    shared = _shared_initial(config, problem, ref_grid)
    grids = [make_grid(dim, n, config.alpha) for n in config.n_cuts]
    specs = [[method_spec(m, tau, config.t_final) for tau in config.levels]
             for m in config.methods]

    def job(sample: int):
        return _one_sample(sample, config, shared, ref_grid, ref_method,
                           grids, specs)

    if config.n_workers > 1:
        with ThreadPoolExecutor(max_workers=config.n_workers) as pool:
            results = list(pool.map(job, range(config.n_samples)))
    else:
        results = [job(s) for s in range(config.n_samples)]

    err_sq = np.stack([r[0] for r in results])   # (sample, method, level)
    wall = np.stack([r[1] for r in results]).sum(axis=0)

    reports = {}
    total = 0
    excluded = 0
    for mi, m in enumerate(config.methods):
        rep = _aggregate(m, config.levels, config.n_cuts, err_sq[:, mi, :],
                         wall[mi] if collect_timing else None)
        reports[m] = rep
        for row in rep.rows:
            total += config.n_samples
            excluded += row.excluded
    if excluded > MAX_EXCLUDED_FRACTION * total:
        raise NumericalFailure(
            f"{excluded} of {total} runs excluded (> {MAX_EXCLUDED_FRACTION:.0%})")
    return reports


def compare_methods(config: ExperimentConfig):
    """Convergence reports with measured per-level timings.

    Returns (reports, timing) where timing[method] lists the summed wall
    seconds per level, coarsest first.
    """
    config = resolve_config(config)
    if len(config.methods) < 2:
        raise ConfigError("compare needs at least two methods")
    reports = run_convergence(config, collect_timing=True)
    timing = {m: [row.wall_seconds for row in rep.rows]
              for m, rep in reports.items()}
    return reports, timing


# ---------------------------------------------------------------------------
# single-path runs with snapshots


def run_single(config: ExperimentConfig, sample_index: int | None = None) -> dict:
    """Integrate one sample path with one method, emitting snapshots.

    Writes SWV1 snapshots plus per-snapshot plot data into out_dir and
    returns a summary dict with the final pair norms.
    """
    config = resolve_config(config)
    if sample_index is None:
        sample_index = config.sample_index
    dim, problem = study_problem(config)
    tau = config.tau if config.tau is not None else config.levels[-1]
    n_cut = default_n_cut(tau)
    grid = make_grid(dim, n_cut, config.alpha)
    spec = method_spec(config.methods[0], tau, config.t_final)
    lattice = sample_path(config.seed, sample_index, config.t_final, tau)
    os.makedirs(config.out_dir, exist_ok=True)
    stride = config.snapshot_stride
    if stride <= 0:
        stride = max(spec.n_steps // 8, 1)

    written = []

    def on_snapshot(step, t, state):
        base = os.path.join(config.out_dir, f"snap_{step:06d}")
        save_snapshot(base + ".swv", state, t)
        u, _ = state_to_fields(state)
        if dim == 2:
            u = u[u.shape[0] // 2]  # middle row, noted in the header
            comment = f"u(x, 0.5) at t={t:.17g}"
        else:
            comment = f"u(x) at t={t:.17g}"
        xs = np.arange(u.shape[0]) / u.shape[0]
        write_plot_data(base + ".txt", xs, u, comment)
        written.append(base + ".swv")

    result = run(spec, grid, problem, lattice,
                 snapshot_stride=stride, on_snapshot=on_snapshot)
    final_u = replace(result.final_state,
                      v_hat=np.zeros_like(result.final_state.v_hat))
    summary = {
        "method": spec.kind,
        "tau": tau,
        "n_cut": n_cut,
        "steps": result.steps,
        "wall_seconds": result.wall_time,
        "final_norm_pair": sobolev_norm(result.final_state, 0.0),
        "final_norm_u": sobolev_norm(final_u, 0.0),
        "snapshots": written,
    }
    return summary


# ---------------------------------------------------------------------------
# emission


def emit_csv(reports, path) -> None:
    """Write reports (one or many) as UTF-8 CSV with 17-digit floats."""
    if isinstance(reports, ConvergenceReport):
        reports = [reports]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("method,tau,n_cut,n_samples,rms_error,stderr,excluded,wall_seconds\n")
            for rep in reports:
                for row in rep.rows:
                    fh.write(
                        f"{rep.method},{row.tau:.17g},{row.n_cut},{row.n_samples},"
                        f"{row.rms_error:.17g},{row.stderr:.17g},{row.excluded},"
                        f"{row.wall_seconds:.17g}\n")
    except OSError as exc:
        raise OSError(f"writing report to {path}: {exc}") from exc


def parse_csv(path) -> list[dict]:
    """Read back an emitted CSV into typed row dicts."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            vals = line.strip().split(",")
            rec = dict(zip(header, vals))
            rec["tau"] = float(rec["tau"])
            rec["n_cut"] = int(rec["n_cut"])
            rec["n_samples"] = int(rec["n_samples"])
            rec["rms_error"] = float(rec["rms_error"])
            rec["stderr"] = float(rec["stderr"])
            rec["excluded"] = int(rec["excluded"])
            rec["wall_seconds"] = float(rec["wall_seconds"])
            rows.append(rec)
    return rows


def write_plot_data(path, xs, ys, comment: str) -> None:
    """Two-column whitespace-separated plot data with one comment line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {comment}\n")
        for x, y in zip(xs, ys):
            fh.write(f"{x:.17g} {y:.17g}\n")


def emit_study(reports, out_dir: str, timing=None) -> str:
    """Write the study CSV plus per-method plot data; returns the CSV path."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "convergence.csv")
    emit_csv(list(reports.values()), csv_path)
    for m, rep in reports.items():
        taus = [row.tau for row in rep.rows]
        errs = [row.rms_error for row in rep.rows]
        write_plot_data(os.path.join(out_dir, f"error_vs_tau_{m}.txt"),
                        taus, errs, f"{m}: rms pair-norm error vs tau")
        if timing is not None:
            write_plot_data(os.path.join(out_dir, f"error_vs_time_{m}.txt"),
                            timing[m], errs, f"{m}: rms pair-norm error vs wall seconds")
    return csv_path


# ---------------------------------------------------------------------------
# flat key=value config files


_LIST_KEYS = {"methods", "levels", "n_cuts"}
_INT_KEYS = {"dim", "preset", "n_samples", "seed", "n_workers",
             "sample_index", "snapshot_stride"}
_FLOAT_KEYS = {"gamma", "alpha", "t_final", "tau_ref", "tau"}
_BOOL_KEYS = {"full_fidelity"}

METHOD_ALIASES = {"hrlri": "hr_lri", "hr_lri": "hr_lri", "lri": "lri",
                  "sem": "sem", "stm": "stm"}


def canonical_method(name: str) -> str:
    key = name.strip().lower()
    if key not in METHOD_ALIASES:
        raise ConfigError(f"unknown method {name!r}")
    return METHOD_ALIASES[key]


def parse_config_file(path) -> dict[str, str]:
    """key=value lines, '#' comments, later keys win."""
    out: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, val = line.split("=", 1)
                out[key.strip()] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return out


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    """Typed ExperimentConfig from string key=value pairs."""
    kwargs: dict = {}
    for key, val in mapping.items():
        if key in _INT_KEYS:
            kwargs[key] = int(val)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(val)
        elif key in _BOOL_KEYS:
            kwargs[key] = val.strip().lower() in ("1", "true", "yes", "on")
        elif key == "methods":
            kwargs[key] = tuple(canonical_method(v) for v in val.split(",") if v.strip())
        elif key == "levels":
            kwargs[key] = tuple(float(v) for v in val.split(",") if v.strip())
        elif key == "n_cuts":
            kwargs[key] = tuple(int(v) for v in val.split(",") if v.strip())
        elif key == "out_dir":
            kwargs[key] = val
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
