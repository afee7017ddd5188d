"""Batch experiments behind the command-line subcommands.

Each ``run_*`` function takes an :class:`ExperimentConfig`, does the
computation and returns a :class:`RunResult` holding named tables and
figure descriptions. Nothing is written until :meth:`RunResult.write`, so
tests can inspect results directly.

Independent scan points (durations, particle numbers) go through a thread
pool; results are always ordered by the scan parameter.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import plotting
from .config import ExperimentConfig
from .errors import InvalidArgumentError
from .manybody import FERMI, TG, coherence_spectrum, many_body_fidelity, overlap_matrix, rspdm
from .metrics import (
    average_speed,
    qsl_report,
    trace_distance,
    trace_distance_decomposed,
)
from .propagate import RampSchedule, evolve
from .records import read_ramp, write_csv, write_ramp
from .spectral import (
    Grid,
    PotentialSpec,
    build_grid,
    eigen_residuals,
    orbital_widths,
    slater_energy_stats,
    stationary_states,
)
from .sta import ansatz_energy, design_scaling, ermakov_residual, ramp_from_scaling, scaling_fixed_point

log = logging.getLogger(__name__)

DEFAULT_POINTS = 256
#: Static ground-state scans are cheap, and the TG occupations converge
#: slowly in the grid spacing, so they start from a finer grid.
STATIC_POINTS = 512
#: Grid cutoff wavenumber over the largest orbital momentum in the run.
MOMENTUM_MARGIN = 3.5
#: Box margin beyond the outermost classical turning point, in ansatz widths.
TAIL_WIDTHS = 6.0
#: Occupations written per snapshot in the quench coherence table.
THETA_COLUMNS = 10


# ---------------------------------------------------------------- results


@dataclass
class Table:
    columns: list
    rows: list
    time_series: bool = False

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


@dataclass
class Figure:
    stem: str
    x: np.ndarray
    series: dict
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    markers: bool = False
    inset: tuple = None


@dataclass
class RunResult:
    kind: str
    config: ExperimentConfig
    tables: dict = field(default_factory=dict)
    figures: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def write(self, out_dir=None, svg=None) -> list:
        """Write every table as CSV (and figures as SVG unless disabled)."""
        out = Path(out_dir if out_dir is not None else self.config.out_dir)
        svg = self.config.svg if svg is None else svg
        comment = f"{self.kind}: {self.config.echo()}"
        paths = []
        for stem, table in self.tables.items():
            paths.append(write_csv(out / f"{stem}.csv", table.columns, table.rows,
                                   comment, table.time_series))
        for stem, ramp in self.extras.get("ramps_to_write", {}).items():
            paths.append(write_ramp(out / f"{stem}.csv", ramp, comment))
        if svg:
            for fig in self.figures:
                paths.append(plotting.line_plot(
                    out / f"{fig.stem}.svg", fig.x, fig.series, fig.xlabel, fig.ylabel,
                    logx=fig.logx, logy=fig.logy, markers=fig.markers, inset=fig.inset))
        return paths


# ---------------------------------------------------------------- helpers


def auto_grid(n_particles, q, lam_lo, lam_hi, min_points=DEFAULT_POINTS) -> Grid:
    """Grid sized from the ansatz widths of the highest occupied level.

    The half width covers the turning point of level ``N-1`` in the weakest
    trap plus ``TAIL_WIDTHS`` ansatz widths; the spacing resolves its
    momentum in the strongest trap ``MOMENTUM_MARGIN`` times over, rounded
    up to a multiple of 64 points.
    """
    n = n_particles - 1
    root = math.sqrt(2 * n + 1)
    wide = scaling_fixed_point(n, q, lam_lo)
    narrow = scaling_fixed_point(n, q, lam_hi)
    half = math.ceil(wide * (root + TAIL_WIDTHS))
    needed = 2 * half * MOMENTUM_MARGIN * (root / narrow) / math.pi
    return build_grid(half, max(min_points, 64 * math.ceil(needed / 64)))


def experiment_grid(cfg: ExperimentConfig, n_particles=None, lam_lo=None, lam_hi=None,
                    min_points=DEFAULT_POINTS) -> Grid:
    """Explicit grid settings from ``cfg`` where given, automatic otherwise."""
    n = n_particles or cfg.n_particles
    lo = min(cfg.lam_i, cfg.lam_f) if lam_lo is None else lam_lo
    hi = max(cfg.lam_i, cfg.lam_f) if lam_hi is None else lam_hi
    if cfg.half_width is not None and cfg.n_points is not None:
        return build_grid(cfg.half_width, cfg.n_points)
    auto = auto_grid(n, cfg.q, lo, hi, cfg.n_points or min_points)
    half = cfg.half_width if cfg.half_width is not None else auto.x_max
    return build_grid(half, cfg.n_points or auto.n_points)


def _pool_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _record_every(cfg):
    return max(1, int(round(cfg.record_dt / cfg.dt)))


def design_index(kind, cfg, n_particles=None):
    n = n_particles or cfg.n_particles
    return {"n0": 0, "nmax": n - 1, "design": cfg.edge_index}.get(kind)


def make_ramp(kind, cfg: ExperimentConfig, t_f, n_particles=None):
    """``(schedule, sta_ramp_or_None)`` for a ramp kind at duration ``t_f``.

    Kinds: ``n0`` and ``nmax`` (designed for the lowest and the highest
    occupied level), ``design`` (``cfg.design_n``, or ``cfg.ramp_file`` when
    set), ``linear`` and ``quench`` (sudden jump to ``lam_f``).
    """
    if kind == "linear":
        return RampSchedule.linear(cfg.lam_i, cfg.lam_f, t_f), None
    if kind == "quench":
        return RampSchedule.constant(cfg.lam_i, cfg.lam_f, t_f), None
    if kind == "design" and cfg.ramp_file:
        sta = read_ramp(cfg.ramp_file)
        return sta.schedule(), sta
    n = design_index(kind, cfg, n_particles)
    if n is None:
        raise InvalidArgumentError(f"unknown ramp kind {kind!r}")
    poly = design_scaling(n, cfg.q, cfg.lam_i, cfg.lam_f, t_f)
    sta = ramp_from_scaling(poly, cfg.ramp_samples)
    return sta.schedule(), sta


def _label(kind, cfg, n_particles=None):
    n = design_index(kind, cfg, n_particles)
    return kind if n is None else f"sta_n{n}"


def _primary_ramp(cfg):
    """STA ramp used for trace distances and speeds in scans."""
    for kind in ("nmax", "design", "n0"):
        if kind in cfg.ramps:
            return kind
    return "nmax"


def rms_width(orbs) -> float:
    """Root-mean-square width of the total density per particle."""
    return float(np.sqrt(np.mean(orbital_widths(orbs) ** 2)))


def _speed_and_spectra(traj, statistics, threads, n_theta=0, method="exact"):
    """Speed series per statistics plus TG occupations at every snapshot."""
    speeds, theta = {}, None
    for stat in statistics:
        observer = None
        if stat == TG and n_theta:
            theta = np.zeros((len(traj), n_theta))

            def observer(k, rho, out=theta):
                occ = coherence_spectrum(rho).occupations
                out[k, :min(n_theta, occ.size)] = occ[:n_theta]
        speeds[stat] = average_speed(traj, stat, threads, observer=observer, method=method)
    return speeds, theta


def _qsl_row(traj, initial, stat, speeds, threads):
    rep = qsl_report(initial, traj.final, traj=traj, statistics=stat,
                     speeds=speeds, n_jobs=threads)
    return rep, [rep.duration, rep.fidelity, rep.bures_angle, rep.energy_std,
                 rep.mean_energy, rep.mt_bound, rep.ml_bound, rep.unified_bound,
                 rep.trace_distance, rep.average_speed, rep.geometric_bound]


QSL_COLUMNS = ["t_f", "fidelity", "bures_angle", "energy_std", "mean_energy_above_ground",
               "mt_bound", "ml_bound", "unified_bound", "trace_distance",
               "average_speed", "geometric_bound"]


# ---------------------------------------------------------------- experiments


def run_eigens(cfg: ExperimentConfig) -> RunResult:
    """Lowest levels of the trap at ``lam_i`` with the ansatz comparison."""
    cfg = cfg.resolved()
    count = cfg.count or cfg.n_particles
    grid = experiment_grid(cfg, count, cfg.lam_i, cfg.lam_i)
    pot = PotentialSpec(cfg.q, cfg.lam_i)
    states = stationary_states(grid, pot, count)
    res = eigen_residuals(states, pot)
    widths = orbital_widths(states)
    rows = []
    for n in range(count):
        e_var = ansatz_energy(n, cfg.lam_i, cfg.q)
        e = states.energies[n]
        rows.append([n, e, e_var, (e_var - e) / e, widths[n], res[n]])
    shown = min(count, THETA_COLUMNS)
    x = grid.x
    orb_rows = [[x[i], pot(grid)[i]] + [states.amplitudes[n, i].real for n in range(shown)]
                for i in range(grid.n_points)]
    result = RunResult("eigens", cfg)
    result.tables["eigens"] = Table(
        ["n", "energy", "ansatz_energy", "relative_gap", "width", "residual"], rows)
    result.tables["eigen_orbitals"] = Table(
        ["x", "potential"] + [f"psi_{n}" for n in range(shown)], orb_rows)
    idx = np.arange(count)
    result.figures.append(Figure(
        "eigen_orbitals", x,
        {f"n={n}": states.amplitudes[n].real + states.energies[n] for n in range(shown)},
        "x", "psi_n(x) + E_n"))
    result.figures.append(Figure(
        "eigen_energies", idx, {"exact": states.energies,
                                "ansatz": [r[2] for r in rows]},
        "n", "E_n", markers=True))
    result.extras.update(states=states, grid=grid)
    return result


def run_quench(cfg: ExperimentConfig) -> RunResult:
    """Sudden jump ``lam_i -> lam_f`` held for ``t_f``: speeds and coherence.

    With ``speed_method = record`` the evolution runs one recording step past
    ``t_f`` so that the speed at ``t_f`` is still a central difference.
    """
    cfg = cfg.resolved()
    grid = experiment_grid(cfg)
    n = cfg.n_particles
    initial = stationary_states(grid, PotentialSpec(cfg.q, cfg.lam_i), n)
    every = _record_every(cfg)
    extra = cfg.speed_method == "record"
    ramp, _ = make_ramp("quench", cfg, cfg.t_f + extra * every * cfg.dt)
    long_traj = evolve(initial, ramp, cfg.q, cfg.dt, every)
    n_theta = min(THETA_COLUMNS, grid.n_points)
    long_speeds, theta = _speed_and_spectra(long_traj, cfg.statistics, cfg.threads, n_theta,
                                            cfg.speed_method)
    keep = len(long_traj) - extra
    traj = long_traj.head(keep)
    speeds = {s: v.head(keep) for s, v in long_speeds.items()}
    theta = None if theta is None else theta[:keep]

    result = RunResult("quench", cfg)
    stats = list(cfg.statistics)
    result.tables["quench_speed"] = Table(
        ["t"] + [f"v_{s}" for s in stats],
        [[t] + [speeds[s].speeds[k] for s in stats] for k, t in enumerate(traj.times)],
        time_series=True)
    result.figures.append(Figure("quench_speed", traj.times,
                                 {s: speeds[s].speeds for s in stats}, "t", "v(t)"))
    if theta is not None:
        result.tables["quench_theta"] = Table(
            ["t"] + [f"theta_{j}" for j in range(n_theta)],
            [[t] + list(theta[k]) for k, t in enumerate(traj.times)], time_series=True)
        first = coherence_spectrum(rspdm(traj.initial, TG, cfg.threads)).occupations
        last = coherence_spectrum(rspdm(traj.final, TG, cfg.threads)).occupations
        shown = min(max(2 * n, 20), first.size)
        result.tables["quench_spectrum"] = Table(
            ["n", "theta_initial", "theta_final"],
            [[j, first[j], last[j]] for j in range(shown)])
        result.figures.append(Figure(
            "quench_theta", traj.times, {f"theta_{j}": theta[:, j] for j in range(n_theta)},
            "t", "theta_n(t)",
            inset=(np.arange(shown), {"t=0": first[:shown], "t=t_f": last[:shown]}, True)))
    reports, rows = {}, []
    for s in stats:
        reports[s], row = _qsl_row(traj, initial, s, speeds[s], cfg.threads)
        rows.append([s] + row)
    result.tables["quench_qsl"] = Table(["statistics"] + QSL_COLUMNS, rows)
    result.extras.update(trajectory=traj, speeds=speeds, theta=theta, qsl=reports)
    return result


def run_sta_design(cfg: ExperimentConfig) -> RunResult:
    """Design the STA ramps named in ``cfg.ramps`` and write them as (t, lambda)."""
    cfg = cfg.resolved()
    result = RunResult("sta-design", cfg)
    rows, ramps, series = [], {}, {}
    indices = []
    for kind in cfg.ramps:
        n = design_index(kind, cfg)
        if n is not None and n not in indices:
            indices.append(n)
    for n in indices:
        poly = design_scaling(n, cfg.q, cfg.lam_i, cfg.lam_f, cfg.t_f)
        sta = ramp_from_scaling(poly, cfg.ramp_samples)
        resid = ermakov_residual(poly, sta)
        rows.append([n, poly.coefficient, poly(0.0), poly(cfg.t_f), float(sta.values.min()),
                     float(sta.values.max()), resid, int(sta.negative)])
        ramps[f"sta_ramp_n{n}"] = sta
        series[f"n={n}"] = sta.values
    result.tables["sta_design"] = Table(
        ["n", "coefficient_D", "a_initial", "a_final", "lambda_min", "lambda_max",
         "ermakov_residual", "negative"], rows)
    if ramps:
        t = next(iter(ramps.values())).times
        result.figures.append(Figure("sta_ramps", t, series, "t", "lambda(t)"))
    result.extras["ramps_to_write"] = ramps
    return result


def run_sta_run(cfg: ExperimentConfig) -> RunResult:
    """Evolve the ground Fermi sea under each ramp and follow it to the target."""
    cfg = cfg.resolved()
    kinds = ["design"] if cfg.ramp_file else list(cfg.ramps)
    grid = experiment_grid(cfg)
    n = cfg.n_particles
    initial = stationary_states(grid, PotentialSpec(cfg.q, cfg.lam_i), n)
    target_pot = PotentialSpec(cfg.q, cfg.lam_f)
    target = stationary_states(grid, target_pot, n)
    e_target = float(np.sum(target.energies))
    targets = {s: rspdm(target, s, cfg.threads) for s in cfg.statistics}

    def job(kind):
        schedule, _ = make_ramp(kind, cfg, cfg.t_f)
        return evolve(initial, schedule, cfg.q, cfg.dt, _record_every(cfg))

    result = RunResult("sta-run", cfg)
    summary = []
    fid_series = {}
    trajs = dict(zip(kinds, _pool_map(job, kinds, cfg.threads)))
    for kind, traj in trajs.items():
        label = _label(kind, cfg)
        fids = [many_body_fidelity(traj.orbitals(k), target) for k in range(len(traj))]
        rows = [[t, traj.strength(k), fids[k], rms_width(traj.orbitals(k))]
                for k, t in enumerate(traj.times)]
        result.tables[f"sta_run_{label}"] = Table(["t", "lambda", "fidelity", "width"], rows,
                                                  time_series=True)
        fid_series[label] = fids
        excess = slater_energy_stats(traj.final, target_pot)[0] - e_target
        tds = [trace_distance(rspdm(traj.final, s, cfg.threads), targets[s])
               for s in cfg.statistics]
        summary.append([label, traj.ramp.t_f, fids[-1], excess] + tds)
        t_axis = traj.times
    result.tables["sta_run"] = Table(
        ["ramp", "t_f", "fidelity", "energy_excess"] + [f"TD_{s}" for s in cfg.statistics],
        summary)
    result.figures.append(Figure("sta_run_fidelity", t_axis, fid_series, "t",
                                 "fidelity with target"))
    result.extras.update(trajectories=trajs, target=target)
    return result


def _tf_point(cfg, initial, target, tspec, t_f, speed_wanted):
    """Everything the duration scan needs at one ``t_f``."""
    out = {"t_f": t_f, "fidelity": {}, "bounds": {}}
    primary = _primary_ramp(cfg)
    for kind in dict.fromkeys(list(cfg.ramps) + [primary]):
        schedule, _ = make_ramp(kind, cfg, t_f)
        traj = evolve(initial, schedule, cfg.q, cfg.dt, _record_every(cfg))
        out["fidelity"][kind] = many_body_fidelity(traj.final, target)
        # energy bounds need no RSPDM, so every ramp gets them
        out["bounds"][kind] = qsl_report(initial, traj.final, traj=traj)
        if kind != primary:
            continue
        td = {}
        for s in cfg.statistics:
            rho = rspdm(traj.final, s)
            td[s] = trace_distance(rho, tspec[s]["rho"])
            spec = coherence_spectrum(rho)
            fermi_ov = overlap_matrix(target, traj.final) if s == FERMI else None
            parts = trace_distance_decomposed(spec, tspec[s]["spec"],
                                              n_particles=len(initial),
                                              fermi_overlaps=fermi_ov)
            td[f"{s}_parts"] = parts
            if s == TG:
                kappa = tspec[s]["spec"].occupations
                out["theta_fluct"] = (spec.occupations[0] - kappa[0],
                                      spec.occupations[1] - kappa[1])
        out["td"] = td
        if speed_wanted:
            speeds = {s: average_speed(traj, s, method=cfg.speed_method)
                      for s in cfg.statistics}
            out["speeds"] = speeds
            out["qsl"] = {s: qsl_report(initial, traj.final, traj=traj, statistics=s,
                                        speeds=speeds[s]) for s in cfg.statistics}
    log.info("tf-scan: t_f=%g done", t_f)
    return out


def run_tf_scan(cfg: ExperimentConfig) -> RunResult:
    """Fidelity, trace distance, speed and coherence versus ramp duration."""
    cfg = cfg.resolved()
    grid = experiment_grid(cfg)
    n = cfg.n_particles
    initial = stationary_states(grid, PotentialSpec(cfg.q, cfg.lam_i), n)
    target = stationary_states(grid, PotentialSpec(cfg.q, cfg.lam_f), n)
    tspec = {}
    for s in cfg.statistics:
        rho = rspdm(target, s, cfg.threads)
        tspec[s] = {"rho": rho, "spec": coherence_spectrum(rho)}
    durations = sorted(set(cfg.t_f_list) | set(cfg.speed_t_f_list))
    speed_set = set(cfg.speed_t_f_list)
    points = _pool_map(lambda t: _tf_point(cfg, initial, target, tspec, t, t in speed_set),
                       durations, cfg.threads)

    result = RunResult("tf-scan", cfg)
    stats = list(cfg.statistics)
    scan = [p for p in points if p["t_f"] in set(cfg.t_f_list)]
    fid_cols = [f"F_{'sta_' + k if k != 'linear' else k}" for k in cfg.ramps]
    result.tables["fidelity"] = Table(
        ["t_f"] + fid_cols, [[p["t_f"]] + [p["fidelity"][k] for k in cfg.ramps] for p in scan])
    td_cols = [f"TD_{s}" for s in stats] + [f"TD_{s}_approx" for s in stats]
    td_rows = []
    for p in scan:
        approx = [p["td"][f"{s}_parts"].tg_approx if s == TG else p["td"][f"{s}_parts"].fermi_approx
                  for s in stats]
        td_rows.append([p["t_f"]] + [p["td"][s] for s in stats] + approx)
    result.tables["trace_distance"] = Table(["t_f"] + td_cols, td_rows)
    t_axis = [p["t_f"] for p in scan]
    result.figures.append(Figure("fidelity", t_axis,
                                 dict(zip(fid_cols, zip(*[r[1:] for r in result.tables["fidelity"].rows]))),
                                 "t_f", "F"))
    result.figures.append(Figure(
        "trace_distance", t_axis, {c: [r[i + 1] for r in td_rows] for i, c in enumerate(td_cols[:len(stats)])},
        "t_f", "T_D",
        inset=(t_axis, {c: [r[i + 1] for r in td_rows] for i, c in enumerate(td_cols)}, True)))
    if TG in stats:
        rows = [[p["t_f"], *p["theta_fluct"]] for p in scan]
        result.tables["theta_fluct"] = Table(["t_f", "dtheta_0", "dtheta_1"], rows)
        result.figures.append(Figure(
            "theta_fluct", t_axis, {"theta_0 - kappa_0": [r[1] for r in rows],
                                    "theta_1 - kappa_1": [r[2] for r in rows]},
            "t_f", "occupation shift",
            inset=(t_axis, {"|theta_0 - kappa_0|": [abs(r[1]) for r in rows],
                            "T_D tg": [p["td"][TG] for p in scan]}, True)))
    sp = [p for p in points if "speeds" in p]
    if sp:
        result.tables["speed"] = Table(
            ["t_f"] + [f"vbar_{s}" for s in stats],
            [[p["t_f"]] + [p["speeds"][s].average for s in stats] for p in sp])
        result.figures.append(Figure(
            "speed", [p["t_f"] for p in sp],
            {s: [p["speeds"][s].average for p in sp] for s in stats},
            "t_f", "average speed", logx=True, logy=True, markers=True))
        qsl_rows = []
        for p in sp:
            for s in stats:
                rep = p["qsl"][s]
                qsl_rows.append([s, p["t_f"], rep.fidelity, rep.bures_angle, rep.energy_std,
                                 rep.mean_energy, rep.mt_bound, rep.ml_bound,
                                 rep.unified_bound, rep.trace_distance, rep.average_speed,
                                 rep.geometric_bound])
        result.tables["tf_qsl"] = Table(["statistics"] + QSL_COLUMNS, qsl_rows)
    bound_rows = []
    for p in points:
        for kind, rep in p["bounds"].items():
            bound_rows.append([_label(kind, cfg), p["t_f"], rep.fidelity, rep.bures_angle,
                               rep.energy_std, rep.mean_energy, rep.mt_bound, rep.ml_bound,
                               rep.unified_bound])
    result.tables["tf_bounds"] = Table(
        ["ramp", "t_f", "fidelity_to_initial", "bures_angle", "energy_std",
         "mean_energy", "mt_bound", "ml_bound", "unified_bound"], bound_rows)
    result.extras.update(points=points, grid=grid)
    return result


def fit_exponent(ns, values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(ns)``."""
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def run_coherence_scan(cfg: ExperimentConfig) -> RunResult:
    """Largest natural occupation of the ground state versus particle number."""
    cfg = cfg.resolved()
    ns = sorted(cfg.n_list)

    def job(n):
        grid = experiment_grid(cfg, n, cfg.lam_i, cfg.lam_i, STATIC_POINTS)
        orbs = stationary_states(grid, PotentialSpec(cfg.q, cfg.lam_i), n)
        out = {}
        for s in cfg.statistics:
            out[s] = coherence_spectrum(rspdm(orbs, s)).theta0
        return out

    theta = _pool_map(job, ns, cfg.threads)
    stats = list(cfg.statistics)
    exps = {s: fit_exponent(ns, [t[s] for t in theta]) if len(ns) > 1 else float("nan")
            for s in stats}
    rows = [[n] + [t[s] for s in stats] + [exps.get(TG, float("nan"))]
            for n, t in zip(ns, theta)]
    result = RunResult("coherence-scan", cfg)
    result.tables["theta0_vs_N"] = Table(
        ["N"] + [f"theta0_{s}" for s in stats] + ["fitted_exponent"], rows)
    result.figures.append(Figure("theta0_vs_N", ns, {s: [t[s] for t in theta] for s in stats},
                                 "N", "theta_0", logx=True, logy=True, markers=True))
    result.extras.update(exponents=exps)
    return result


def run_infidelity_scan(cfg: ExperimentConfig) -> RunResult:
    """Infidelity at fixed ``t_f`` versus N for the n=0 and edge ramps.

    Orbitals evolve independently, so the largest Fermi sea is evolved once
    per ramp and every smaller N reads its fidelity off the leading block
    of the overlap matrix.
    """
    cfg = cfg.resolved()
    ns = sorted(cfg.n_list)
    n_max = ns[-1]
    edge = n_max - 1 if cfg.design_n < 0 else cfg.design_n
    grid = experiment_grid(cfg, n_max)
    initial = stationary_states(grid, PotentialSpec(cfg.q, cfg.lam_i), n_max)
    target = stationary_states(grid, PotentialSpec(cfg.q, cfg.lam_f), n_max)

    def job(index):
        poly = design_scaling(index, cfg.q, cfg.lam_i, cfg.lam_f, cfg.t_f)
        sta = ramp_from_scaling(poly, cfg.ramp_samples)
        final = evolve(initial, sta.schedule(), cfg.q, cfg.dt).final
        p = overlap_matrix(target, final)
        return [1.0 - abs(np.linalg.det(p[:n, :n])) ** 2 for n in ns]

    inf0, inf_edge = _pool_map(job, [0, edge], cfg.threads)
    result = RunResult("infidelity-scan", cfg)
    result.tables["infidelity"] = Table(
        ["N", "infidelity_sta_n0", f"infidelity_sta_n{edge}"],
        [[n, a, b] for n, a, b in zip(ns, inf0, inf_edge)])
    result.figures.append(Figure("infidelity", ns, {"n=0": inf0, f"n={edge}": inf_edge},
                                 "N", "1 - F", logy=True, markers=True))
    result.extras.update(edge=edge, grid=grid)
    return result


def run_qsl_report(cfg: ExperimentConfig) -> RunResult:
    """Speed-limit bounds for the sudden quench and every configured ramp at ``t_f``."""
    cfg = cfg.resolved()
    grid = experiment_grid(cfg)
    initial = stationary_states(grid, PotentialSpec(cfg.q, cfg.lam_i), cfg.n_particles)
    kinds = ["quench"] + [k for k in cfg.ramps if k != "quench"]

    def job(kind):
        schedule, _ = make_ramp(kind, cfg, cfg.t_f)
        traj = evolve(initial, schedule, cfg.q, cfg.dt, _record_every(cfg))
        reps = {}
        for s in cfg.statistics:
            reps[s] = qsl_report(initial, traj.final, traj=traj, statistics=s,
                                 speeds=average_speed(traj, s, method=cfg.speed_method))
        return reps

    reports = dict(zip(kinds, _pool_map(job, kinds, cfg.threads)))
    rows = []
    for kind, reps in reports.items():
        for s, rep in reps.items():
            rows.append([_label(kind, cfg), s, rep.duration, rep.fidelity, rep.bures_angle,
                         rep.energy_std, rep.mean_energy, rep.mt_bound, rep.ml_bound,
                         rep.unified_bound, rep.trace_distance, rep.average_speed,
                         rep.geometric_bound, int(rep.unified_bound <= rep.duration
                                                  and rep.geometric_bound <= rep.duration)])
    result = RunResult("qsl-report", cfg)
    result.tables["qsl"] = Table(["ramp", "statistics"] + QSL_COLUMNS + ["bounds_hold"], rows)
    labels = [_label(k, cfg) for k in kinds]
    series = {"t_f": [cfg.t_f] * len(kinds)}
    for s in cfg.statistics:
        series[f"MT/ML {s}"] = [reports[k][s].unified_bound for k in kinds]
        series[f"geometric {s}"] = [reports[k][s].geometric_bound for k in kinds]
    result.figures.append(Figure("qsl", np.arange(len(kinds)), series,
                                 "ramp (" + ", ".join(labels) + ")", "bound", markers=True))
    result.extras.update(reports=reports)
    return result


RUNNERS = {
    "eigens": run_eigens,
    "quench": run_quench,
    "sta-design": run_sta_design,
    "sta-run": run_sta_run,
    "tf-scan": run_tf_scan,
    "coherence-scan": run_coherence_scan,
    "infidelity-scan": run_infidelity_scan,
    "qsl-report": run_qsl_report,
}


def run(cfg: ExperimentConfig) -> RunResult:
    return RUNNERS[cfg.kind](cfg)
