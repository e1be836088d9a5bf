"""Command-line front end: config parsing, orchestration, result emission.

Subcommands: spectrum | chi0-poles | rpa-poles | shift-report | dyson |
fourier-check | kubo | exact-mb.  Every run echoes its configuration,
effective tolerances, stage timings and property-suite outcomes into a
manifest next to the outputs.  Exit codes: 0 success, 1 property failure,
2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .dyson import (
    TimeGrid,
    VolterraConfig,
    chi0_series,
    dyson_residual,
    dyson_solve_march,
    dyson_solve_picard,
    fourier_transform_series,
    growth_envelope,
    write_series,
)
from .errors import ConfigError, DdrfError
from .exact import (
    PerturbationSetup,
    build_mb_hamiltonian,
    density_coupling,
    exact_pole_ranks,
    kubo_check,
    mb_spectrum,
)
from .grid import (
    Harmonic,
    OrbitalOccupation,
    SoftCoulombWells,
    Tabulated,
    assemble_hamiltonian,
    build_grid,
    diagonalize,
    ground_density,
)
from .kernels import (
    DeltaLocal,
    SoftCoulomb,
    ZeroKernel,
    add_xc,
    alda_kernel,
    assemble_kernel_matrix,
    kernel_sqrt,
)
from .poles import (
    EigenCurveScan,
    PoleRecord,
    ScanConfig,
    chi_rpa_freq,
    eig_curves,
    forward_shift_report,
    poles_to_csv,
    poles_to_json,
    property_checks,
    riesz_rank,
    rpa_pole_table,
    scan_to_csv,
    shift_report_to_csv,
    shift_report_to_json,
)
from .response import build_transitions, chi0_pole_table
from .utils import max_abs

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass
class Tolerances:
    """Every numeric tolerance in effect, surfaced for the manifest."""

    gap_tol: float = 1e-8
    group_tol: float = 1e-9
    rank_tol: float = 1e-10
    eig1_tol: float = 1e-8
    bisection_tol: float = 1e-10
    padding: float = 1e-6
    fixed_point_tol: float = 1e-12
    residual_tol: float = 1e-10
    fourier_tol: float = 1e-6
    residue_floor: float = 1e-8
    kubo_exponent_low: float = 1.8
    kubo_exponent_high: float = 2.2


def _require(section: dict, key: str, path: str):
    if not isinstance(section, dict) or key not in section:
        raise ConfigError(f"{path}.{key}", "missing")
    return section[key]


def _number(section: dict, key: str, path: str, default=None):
    if default is not None and (not isinstance(section, dict) or key not in section):
        return default
    value = _require(section, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
    return value


def _parse_potential(spec: dict, path: str):
    variant = _require(spec, "variant", path)
    if variant == "harmonic":
        return Harmonic(_number(spec, "k", path))
    if variant == "soft_coulomb_wells":
        wells = _require(spec, "wells", path)
        if not isinstance(wells, list) or not wells:
            raise ConfigError(f"{path}.wells", "expected a non-empty list")
        parsed = []
        for i, w in enumerate(wells):
            parsed.append(
                (
                    _number(w, "charge", f"{path}.wells[{i}]"),
                    _number(w, "center", f"{path}.wells[{i}]"),
                    _number(w, "softening", f"{path}.wells[{i}]"),
                )
            )
        return SoftCoulombWells(tuple(parsed))
    if variant == "tabulated":
        return Tabulated(np.asarray(_require(spec, "values", path), dtype=float))
    raise ConfigError(f"{path}.variant", f"unknown potential variant {variant!r}")


def _parse_kernel(spec: dict, path: str):
    variant = _require(spec, "variant", path)
    if variant == "soft_coulomb":
        return SoftCoulomb(
            _number(spec, "softening", path), _number(spec, "strength", path, 1.0)
        )
    if variant == "delta_local":
        return DeltaLocal(_number(spec, "strength", path))
    if variant == "zero":
        return ZeroKernel()
    raise ConfigError(f"{path}.variant", f"unknown kernel variant {variant!r}")


def _parse_probe(spec, grid, path: str) -> np.ndarray:
    x = grid.points
    if isinstance(spec, str):
        if spec == "dipole":
            return x.copy()
        if spec == "quadrupole":
            return x * x
        raise ConfigError(path, f"unknown probe form {spec!r}")
    if isinstance(spec, list):
        v = np.asarray(spec, dtype=float)
        if v.shape != x.shape:
            raise ConfigError(path, f"probe vector length {v.size} != {x.size}")
        return v
    raise ConfigError(path, "expected a form name or a list of values")


@dataclass
class Run:
    """Parsed configuration plus shared runtime state for one subcommand."""

    config: dict
    out_dir: Path
    seed: int
    tolerances: Tolerances
    timings: dict = field(default_factory=dict)
    suites: dict = field(default_factory=dict)

    def path(self, name: str) -> str:
        return str(self.out_dir / name)


def _load_run(args) -> Run:
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {args.config}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}")
    if not isinstance(config, dict):
        raise ConfigError("config", "top level must be an object")
    tol = Tolerances()
    for key, value in (config.get("tolerances") or {}).items():
        if not hasattr(tol, key):
            raise ConfigError(f"tolerances.{key}", "unknown tolerance")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"tolerances.{key}", "expected a number")
        setattr(tol, key, float(value))
    outputs = config.get("outputs") or {}
    out_dir = Path(args.out or outputs.get("directory") or "ddrf-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    return Run(config, out_dir, args.seed, tol)


def _build_model(run: Run):
    model = _require(run.config, "model", "")
    gspec = _require(model, "grid", "model")
    grid = build_grid(
        _number(gspec, "x_min", "model.grid"),
        _number(gspec, "x_max", "model.grid"),
        int(_number(gspec, "n_points", "model.grid")),
    )
    pot = _parse_potential(_require(model, "potential", "model"), "model.potential")
    t0 = time.perf_counter()
    eig = diagonalize(assemble_hamiltonian(grid, pot))
    run.timings["diagonalize"] = time.perf_counter() - t0
    occ = OrbitalOccupation(
        int(_number(model, "n_occupied", "model")),
        int(_number(model, "n_virtual", "model")),
        _number(model, "gap_tol", "model", run.tolerances.gap_tol),
    )
    table = build_transitions(
        eig,
        occ,
        group_tol=_number(model, "group_tol", "model", run.tolerances.group_tol),
        rank_tol=run.tolerances.rank_tol,
    )
    return grid, eig, occ, table


def _build_kernel(run: Run, grid, eig, occ):
    spec = _require(run.config, "kernel", "")
    kernel = _parse_kernel(spec, "kernel")
    F = assemble_kernel_matrix(grid, kernel)
    alda = spec.get("alda")
    if alda:
        model = _require(alda, "model", "kernel.alda")
        rho0 = ground_density(eig, occ.n_occupied)
        if model == "power":
            c = _number(alda, "coefficient", "kernel.alda")
            p = _number(alda, "exponent", "kernel.alda")
            xc = alda_kernel(grid, rho0, lambda rho: c * np.power(rho, p))
        elif model == "constant":
            c = _number(alda, "coefficient", "kernel.alda")
            xc = alda_kernel(grid, rho0, lambda rho: c * np.ones_like(rho))
        else:
            raise ConfigError("kernel.alda.model", f"unknown xc model {model!r}")
        F = add_xc(F, xc)
    return F


def _scan_config(run: Run) -> ScanConfig:
    scan = run.config.get("scan") or {}
    return ScanConfig(
        omega_min=scan.get("omega_min"),
        omega_max=scan.get("omega_max"),
        n_samples=int(_number(scan, "n_samples", "scan", 64)),
        padding=_number(scan, "padding", "scan", run.tolerances.padding),
        bisection_tol=run.tolerances.bisection_tol,
        eig1_tol=run.tolerances.eig1_tol,
    )


def _time_grid(run: Run) -> tuple:
    tspec = _require(run.config, "time", "")
    dt = _number(tspec, "dt", "time")
    t_max = _number(tspec, "t_max", "time")
    method = tspec.get("method", "march")
    if method not in ("march", "picard"):
        raise ConfigError("time.method", f"expected march or picard, got {method!r}")
    n_steps = int(round(t_max / dt))
    return TimeGrid(dt, n_steps), method


def _write_manifest(run: Run, command: str) -> None:
    manifest = {
        "command": command,
        "artifact_version": __version__,
        "seed": run.seed,
        "config": run.config,
        "tolerances": asdict(run.tolerances),
        "timings_seconds": run.timings,
        "property_suites": run.suites,
    }
    with open(run.path("manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_spectrum(run: Run) -> int:
    grid, eig, occ, table = _build_model(run)
    with open(run.path("eigenvalues.csv"), "w", newline="") as fh:
        fh.write("index,energy\n")
        for i, e in enumerate(eig.eigenvalues):
            fh.write(f"{i},{_fmt(e)}\n")
    n_keep = occ.n_occupied + occ.n_virtual
    with open(run.path("orbitals.csv"), "w", newline="") as fh:
        fh.write("x," + ",".join(f"orb_{k}" for k in range(n_keep)) + "\n")
        for i, x in enumerate(grid.points):
            row = ",".join(_fmt(eig.eigenvectors[i, k]) for k in range(n_keep))
            fh.write(f"{_fmt(x)},{row}\n")
    return EXIT_OK


def cmd_chi0_poles(run: Run) -> int:
    _, _, _, table = _build_model(run)
    records = [
        PoleRecord(omega=w, rank=r, kind="interior", method="casida")
        for w, r in chi0_pole_table(table)
    ]
    poles_to_csv(records, run.path("chi0_poles.csv"))
    poles_to_json(records, run.path("chi0_poles.json"))
    return EXIT_OK


def _write_eigencurves(run: Run, table, fsqrt) -> None:
    """Plot-ready eigenvalue curves over every excitation-free interval."""
    scan = _scan_config(run)
    boundaries = [g.omega for g in table.groups]
    top = boundaries[-1] * 1.2 + 1.0 if boundaries else 1.0
    edges = [max(scan.padding, 1e-4)] + boundaries + [top]
    rows_omega, rows_eigs = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 8 * scan.padding:
            continue
        pad = min(1e-4, (hi - lo) / 8.0)
        piece = eig_curves(table, fsqrt, (lo + pad, hi - pad), max(scan.n_samples, 16))
        rows_omega.append(piece.omegas)
        rows_eigs.append(piece.eigenvalues)
    if rows_omega:
        combined = EigenCurveScan(
            np.concatenate(rows_omega), np.vstack(rows_eigs), ()
        )
        scan_to_csv(combined, run.path("eigencurves.csv"))


def cmd_rpa_poles(run: Run) -> int:
    grid, eig, occ, table = _build_model(run)
    F = _build_kernel(run, grid, eig, occ)
    fsqrt = kernel_sqrt(F)
    t0 = time.perf_counter()
    records = rpa_pole_table(table, fsqrt, _scan_config(run))
    run.timings["pole_search"] = time.perf_counter() - t0
    located = []
    omegas = [r.omega for r in records]
    if max_abs(F.matrix) == 0.0:
        # the solution equals the reference; there is no resolvent pole to
        # verify by contour integration
        located = list(records)
        records = []
    for r in records:
        gaps = [abs(r.omega - w) for w in omegas if w != r.omega]
        gaps += [abs(r.omega - g.omega) for g in table.groups if abs(r.omega - g.omega) > 1e-12]
        radius = min(gaps + [0.1]) / 3.0
        try:
            rank, residue = riesz_rank(table, fsqrt, r.omega, max(radius, 1e-6))
            located.append(
                PoleRecord(r.omega, r.rank, r.kind, r.method, residue_norm=residue)
            )
            run.suites.setdefault("contour_rank_agrees", True)
            if rank != r.rank:
                run.suites["contour_rank_agrees"] = False
        except DdrfError:
            located.append(r)
    poles_to_csv(located, run.path("rpa_poles.csv"))
    poles_to_json(located, run.path("rpa_poles.json"))
    _write_eigencurves(run, table, fsqrt)
    report = property_checks(table, fsqrt, seed=run.seed)
    run.suites["structural_properties"] = report.passed
    with open(run.path("property_report.json"), "w") as fh:
        json.dump(
            {
                "ratio_violation": report.ratio_violation,
                "blowup_constant": report.blowup_constant,
                "blowup_constant_halved": report.blowup_constant_halved,
                "blowup_stable": report.blowup_stable,
                "nsd_max_eigenvalue": report.nsd_max_eigenvalue,
                "passed": report.passed,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return EXIT_OK if all(run.suites.values()) else EXIT_PROPERTY


def cmd_shift_report(run: Run) -> int:
    grid, eig, occ, table = _build_model(run)
    F = _build_kernel(run, grid, eig, occ)
    fsqrt = kernel_sqrt(F)
    rpa = rpa_pole_table(table, fsqrt, _scan_config(run))
    report = forward_shift_report(chi0_pole_table(table), rpa)
    shift_report_to_csv(report, run.path("shift_report.csv"))
    shift_report_to_json(report, run.path("shift_report.json"))
    run.suites["shift_holds"] = report.holds
    return EXIT_OK if report.holds else EXIT_PROPERTY


def cmd_dyson(run: Run) -> int:
    grid, eig, occ, table = _build_model(run)
    F = _build_kernel(run, grid, eig, occ)
    time_grid, method = _time_grid(run)
    chi0 = chi0_series(table, time_grid)
    t0 = time.perf_counter()
    if method == "march":
        chi = dyson_solve_march(chi0, F)
    else:
        chi = dyson_solve_picard(chi0, F, config=VolterraConfig(method="picard"))
    run.timings["dyson_solve"] = time.perf_counter() - t0
    residual = dyson_residual(chi0, chi, F)
    amplitude, rate = growth_envelope(chi)
    write_series(chi, run.path("chi_rpa_series"))
    ok = residual <= run.tolerances.residual_tol
    run.suites["dyson_residual"] = ok
    with open(run.path("dyson_report.json"), "w") as fh:
        json.dump(
            {
                "method": method,
                "residual": residual,
                "residual_tol": run.tolerances.residual_tol,
                "growth_amplitude": amplitude,
                "growth_rate": rate,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_fourier_check(run: Run) -> int:
    grid, eig, occ, table = _build_model(run)
    F = _build_kernel(run, grid, eig, occ)
    fsqrt = kernel_sqrt(F)
    time_grid, method = _time_grid(run)
    points = (run.config.get("fourier") or {}).get(
        "points", [[0.7, 2.2], [1.0, 2.5], [1.3, 2.8], [0.5, 2.4], [2.0, 3.0]]
    )
    chi0 = chi0_series(table, time_grid)
    solver = dyson_solve_march if method == "march" else dyson_solve_picard
    chi = solver(chi0, F)
    deviations = []
    for pair in points:
        z = complex(pair[0], pair[1])
        ft = fourier_transform_series(chi, z)
        closed = chi_rpa_freq(table, F, fsqrt, z)
        deviations.append(max_abs(ft - closed))
    worst = max(deviations)
    ok = worst <= run.tolerances.fourier_tol
    run.suites["fourier_consistency"] = ok
    with open(run.path("fourier_check.json"), "w") as fh:
        json.dump(
            {
                "points": [[float(p[0]), float(p[1])] for p in points],
                "deviations": deviations,
                "max_deviation": worst,
                "tolerance": run.tolerances.fourier_tol,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return EXIT_OK if ok else EXIT_PROPERTY


def _build_exact(run: Run):
    grid, eig, occ, table = _build_model(run)
    exact = _require(run.config, "exact", "")
    w = _parse_kernel(_require(exact, "interaction", "exact"), "exact.interaction")
    H = build_mb_hamiltonian(
        assemble_hamiltonian(
            grid, _parse_potential(run.config["model"]["potential"], "model.potential")
        ),
        w,
        d_cap=int(_number(exact, "d_cap", "exact", 20000)),
    )
    n_states = int(_number(exact, "n_states", "exact"))
    t0 = time.perf_counter()
    spec = mb_spectrum(H, n_states)
    run.timings["mb_spectrum"] = time.perf_counter() - t0
    return grid, H, spec


def cmd_kubo(run: Run) -> int:
    grid, H, spec = _build_exact(run)
    S = density_coupling(spec)
    pspec = _require(run.config["exact"], "perturbation", "exact")
    profile_name = pspec.get("profile", "step")
    if profile_name == "step":
        profile = lambda t: 1.0
    else:
        raise ConfigError("exact.perturbation.profile", f"unknown profile {profile_name!r}")
    setup = PerturbationSetup(
        v_probe=_parse_probe(_require(pspec, "probe", "exact.perturbation"), grid,
                             "exact.perturbation.probe"),
        v_observe=_parse_probe(_require(pspec, "observe", "exact.perturbation"), grid,
                               "exact.perturbation.observe"),
        profile=profile,
        epsilon=_number(pspec, "epsilon", "exact.perturbation", 1e-2),
        dt=_number(pspec, "dt", "exact.perturbation"),
        t_max=_number(pspec, "t_max", "exact.perturbation"),
    )
    t0 = time.perf_counter()
    report = kubo_check(H, spec, S, setup)
    run.timings["kubo_check"] = time.perf_counter() - t0
    ok = (
        run.tolerances.kubo_exponent_low
        <= report.exponent
        <= run.tolerances.kubo_exponent_high
    )
    run.suites["kubo_scaling"] = ok
    with open(run.path("kubo_report.json"), "w") as fh:
        json.dump(
            {
                "epsilons": [float(e) for e in report.epsilons],
                "max_deviations": [float(d) for d in report.max_deviations],
                "exponent": report.exponent,
                "relative_first_order": report.relative_first_order,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_exact_mb(run: Run) -> int:
    grid, H, spec = _build_exact(run)
    S = density_coupling(spec)
    with open(run.path("mb_spectrum.csv"), "w", newline="") as fh:
        fh.write("index,energy,excitation\n")
        for i, e in enumerate(spec.energies):
            fh.write(f"{i},{_fmt(e)},{_fmt(e - spec.ground_energy)}\n")
    records = [
        PoleRecord(omega=w, rank=r, kind="interior", method="casida")
        for w, r in exact_pole_ranks(spec, S)
    ]
    poles_to_csv(records, run.path("exact_poles.csv"))
    rho = S.apply(spec.states[:, 0])
    with open(run.path("density.csv"), "w", newline="") as fh:
        fh.write("x,rho\n")
        for x, r in zip(grid.points, rho):
            fh.write(f"{_fmt(x)},{_fmt(r)}\n")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "chi0-poles": cmd_chi0_poles,
    "rpa-poles": cmd_rpa_poles,
    "shift-report": cmd_shift_report,
    "dyson": cmd_dyson,
    "fourier-check": cmd_fourier_check,
    "kubo": cmd_kubo,
    "exact-mb": cmd_exact_mb,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddrf",
        description="Response functions of 1D quantum models: spectra, Dyson "
        "solutions, pole tables and structural checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("--threads", type=int, default=None, help="BLAS thread cap")
    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        run = _load_run(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    command = COMMANDS[args.command]
    try:
        t0 = time.perf_counter()
        code = command(run)
        run.timings["total"] = time.perf_counter() - t0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_manifest(run, args.command)
        return EXIT_CONFIG
    except DdrfError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        _write_manifest(run, args.command)
        return EXIT_NUMERICAL
    _write_manifest(run, args.command)
    return code


if __name__ == "__main__":
    sys.exit(main())
