"""Configuration files, CSV reports and the command-line interface.

Subcommands: solve | poles | residues | convergence | plot.  Configs are
flat key=value text files with the history as a quoted expression string.
All numeric CSV output is printed with 17 significant digits so repeated
runs are byte-identical.  Exit codes: 0 success, 1 configuration error,
2 solver error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .charroots import RefinementError, build_pole_family, real_root_scan_window
from .core import NddeProblem, ParseError, parse_function
from .residues import residue_error_report
from .solvers import (
    METHODS,
    SolverConfig,
    SolverError,
    method_of_steps,
    solve_modified_lf,
    solve_original_lf,
    solve_pure_laplace,
)


class ConfigError(ValueError):
    pass


_DEFAULTS = {"method": "modified_lf", "n": 50, "m": 8, "t_max": 10.0,
             "grid_step": 1e-3}

_REQUIRED = ("a", "b", "c", "tau", "history")

_KNOWN_KEYS = set(_REQUIRED) | set(_DEFAULTS) | {"out"}


@dataclass(frozen=True)
class ProblemConfig:
    """One run: problem coefficients plus truncation and grid choices."""

    a: float
    b: float
    c: float
    tau: float
    history: str
    method: str = "modified_lf"
    n: int = 50
    m: int = 8
    t_max: float = 10.0
    grid_step: float = 1e-3
    out: str | None = None

    def to_problem(self) -> NddeProblem:
        try:
            history = parse_function(self.history)
        except ParseError as exc:
            raise ConfigError(f"history expression: {exc}") from exc
        try:
            return NddeProblem(a=self.a, b=self.b, c=self.c, tau=self.tau,
                               history=history)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(N=self.n, M=self.m, method=self.method)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self) -> np.ndarray:
        if self.grid_step <= 0 or self.t_max <= 0:
            raise ConfigError("t_max and grid_step must be positive")
        count = int(round(self.t_max / self.grid_step))
        return np.linspace(0.0, count * self.grid_step, count + 1)


def _parse_number(text: str, key: str) -> float:
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: cannot parse number {text!r}") from exc


def parse_config_text(text: str, source: str = "<config>") -> ProblemConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key] = value
    missing = [key for key in _REQUIRED if key not in values]
    if missing:
        raise ConfigError(f"{source}: missing required keys: {', '.join(missing)}")
    kwargs = {
        "a": _parse_number(values["a"], "a"),
        "b": _parse_number(values["b"], "b"),
        "c": _parse_number(values["c"], "c"),
        "tau": _parse_number(values["tau"], "tau"),
        "history": values["history"],
    }
    if "method" in values:
        if values["method"] not in METHODS:
            raise ConfigError(f"{source}: unknown method {values['method']!r}")
        kwargs["method"] = values["method"]
    for key in ("n", "m"):
        if key in values:
            kwargs[key] = int(_parse_number(values[key], key))
    for key in ("t_max", "grid_step"):
        if key in values:
            kwargs[key] = _parse_number(values[key], key)
    if "out" in values:
        kwargs["out"] = values["out"]
    return ProblemConfig(**kwargs)


def parse_config(path) -> ProblemConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def write_config(cfg: ProblemConfig, path) -> None:
    lines = [
        f"a = {_fmt(cfg.a)}",
        f"b = {_fmt(cfg.b)}",
        f"c = {_fmt(cfg.c)}",
        f"tau = {_fmt(cfg.tau)}",
        f'history = "{cfg.history}"',
        f"method = {cfg.method}",
        f"n = {cfg.n}",
        f"m = {cfg.m}",
        f"t_max = {_fmt(cfg.t_max)}",
        f"grid_step = {_fmt(cfg.grid_step)}",
    ]
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt(x) -> str:
    """17 significant digits: enough to round-trip doubles."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path, header: list[str], rows, comments: list[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for comment in comments:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else _fmt(cell)
                             for cell in row])


# -- subcommand implementations --------------------------------------------


def _series_solver(method: str):
    return {
        "pure_laplace": solve_pure_laplace,
        "original_lf": solve_original_lf,
        "modified_lf": solve_modified_lf,
    }[method]


def run_solve(cfg: ProblemConfig, out_path) -> dict:
    """Grid evaluation of the configured method against the exact oracle.

    Returns summary statistics; writes CSV columns t, y_method, y_mos,
    abs_error.
    """
    start = time.perf_counter()
    problem = cfg.to_problem()
    grid = cfg.grid()
    horizon = int(np.ceil(cfg.t_max / problem.tau - 1e-12))
    mos = method_of_steps(problem, horizon)
    y_mos = mos.evaluate(grid)
    if cfg.method == "mos":
        y_method = y_mos
    else:
        solution = _series_solver(cfg.method)(problem, cfg.solver_config())
        y_method = solution.evaluate(grid)
    err = np.abs(y_method - y_mos)
    rows = zip(grid, y_method, y_mos, err)
    _write_csv(out_path, ["t", "y_method", "y_mos", "abs_error"], rows)
    return {
        "max_error": float(err.max()),
        "wall_time": time.perf_counter() - start,
        "points": grid.size,
    }


def run_poles(cfg: ProblemConfig, out_path) -> dict:
    start = time.perf_counter()
    problem = cfg.to_problem()
    family = build_pole_family(problem, cfg.n)
    radius = real_root_scan_window(problem)
    rows = []
    for pole in family.real_poles:
        rows.append([pole.index, "real", pole.value.real, pole.value.imag,
                     "", "", "", "", pole.residual])
    for pole, seed, improved in zip(family.complex_poles, family.seeds,
                                    family.improved_seeds):
        rows.append([pole.index, "complex", pole.value.real, pole.value.imag,
                     seed.real, seed.imag, improved.real, improved.imag,
                     pole.residual])
    _write_csv(
        out_path,
        ["k", "kind", "re", "im", "seed_re", "seed_im", "improved_re",
         "improved_im", "residual"],
        rows,
        comments=[f"real_root_scan_window = [{_fmt(-radius)}, {_fmt(radius)}]"],
    )
    return {"wall_time": time.perf_counter() - start,
            "real_roots": len(family.real_poles)}


def run_residues(cfg: ProblemConfig, out_path) -> dict:
    start = time.perf_counter()
    problem = cfg.to_problem()
    k_range = range(2, max(cfg.n, 2) + 1)
    report = residue_error_report(problem, k_range, order=cfg.m)
    rows = [
        [row.k, row.mode, row.re_err, row.im_err, row.re_kind, row.im_kind]
        for row in report
    ]
    _write_csv(
        out_path,
        ["k", "mode", "re_rel_err", "im_rel_err", "re_kind", "im_kind"],
        rows,
    )
    return {"wall_time": time.perf_counter() - start, "rows": len(rows)}


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def run_convergence(cfg: ProblemConfig, n_list, out_path) -> dict:
    """Max error against the exact oracle for each method and each N."""
    start = time.perf_counter()
    n_values = sorted(set(int(n) for n in n_list))
    if not n_values or any(n < 1 for n in n_values):
        raise ConfigError(f"invalid N list {list(n_list)!r}")
    problem = cfg.to_problem()
    grid = cfg.grid()
    horizon = int(np.ceil(cfg.t_max / problem.tau - 1e-12))
    y_mos = method_of_steps(problem, horizon).evaluate(grid)
    solvers = [("pure", solve_pure_laplace), ("original", solve_original_lf),
               ("modified", solve_modified_lf)]
    errors = {name: [] for name, _ in solvers}
    for n in n_values:
        run_cfg = SolverConfig(N=n, M=cfg.m, method="modified_lf")
        for name, solver in solvers:
            sol = solver(problem, run_cfg)
            errors[name].append(float(np.abs(sol.evaluate(grid) - y_mos).max()))
    slopes = {
        name: fit_loglog_slope(n_values, errs) if len(n_values) > 1 else None
        for name, errs in errors.items()
    }
    rows = []
    for i, n in enumerate(n_values):
        rows.append([
            n, errors["pure"][i], errors["original"][i], errors["modified"][i],
            "" if slopes["pure"] is None else slopes["pure"],
            "" if slopes["original"] is None else slopes["original"],
            "" if slopes["modified"] is None else slopes["modified"],
        ])
    _write_csv(
        out_path,
        ["N", "max_err_pure", "max_err_original", "max_err_modified",
         "slope_pure", "slope_original", "slope_modified"],
        rows,
    )
    return {"wall_time": time.perf_counter() - start, "slopes": slopes,
            "errors": errors, "n_values": n_values}


def run_plot(csv_path, out_path) -> dict:
    """Render a CSV report as a vector graphic (SVG/PDF by extension)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(csv_path, newline="") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{csv_path}: empty CSV") from None
        rows = [row for row in reader if row]
    if not rows:
        raise ConfigError(f"{csv_path}: no data rows")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if header[:2] == ["t", "y_method"]:
        t = np.array([float(r[0]) for r in rows])
        err = np.array([float(r[3]) for r in rows])
        positive = err > 0
        ax.semilogy(t[positive], err[positive], lw=0.8)
        ax.set_xlabel("t")
        ax.set_ylabel("abs error")
    elif header[0] == "N":
        n = np.array([float(r[0]) for r in rows])
        for idx, label in ((1, "pure"), (2, "original"), (3, "modified")):
            err = np.array([float(r[idx]) for r in rows])
            ax.loglog(n, err, "o-", label=label)
            if len(n) > 1:
                slope = fit_loglog_slope(n, err)
                fit = np.exp(np.polyval(np.polyfit(np.log(n), np.log(err), 1),
                                        np.log(n)))
                ax.loglog(n, fit, "--", lw=0.7,
                          label=f"{label} fit slope {slope:.2f}")
        ax.set_xlabel("N")
        ax.set_ylabel("max error")
        ax.legend(fontsize=7)
    else:
        raise ConfigError(f"{csv_path}: unrecognised CSV schema {header!r}")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return {"out": str(out_path)}


# -- command line -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(sub):
    sub.add_argument("--config", required=True, help="problem config file")
    sub.add_argument("--method", choices=METHODS)
    sub.add_argument("--n", type=int, help="ladder terms N")
    sub.add_argument("--m", type=int, help="highest tail polynomial order M")
    sub.add_argument("--t-max", type=float, dest="t_max")
    sub.add_argument("--grid-step", type=float, dest="grid_step")
    sub.add_argument("--out", help="output CSV path")


def _load(args) -> ProblemConfig:
    cfg = parse_config(args.config)
    overrides = {}
    for key in ("method", "n", "m", "t_max", "grid_step", "out"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def _out_path(cfg: ProblemConfig, suffix: str):
    if cfg.out:
        return cfg.out
    return f"nddelf_{suffix}.csv"


def main(argv=None) -> int:
    parser = _Parser(prog="nddelf",
                     description="Semi-analytic solvers for linear neutral "
                                 "delay differential equations")
    commands = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "poles", "residues", "convergence"):
        sub = commands.add_parser(name)
        _add_common(sub)
        if name == "convergence":
            sub.add_argument("--n-list", dest="n_list",
                             help="comma-separated ladder sizes")
    plot = commands.add_parser("plot")
    plot.add_argument("csv", help="CSV produced by solve or convergence")
    plot.add_argument("--out", help="output figure path (.svg/.pdf)")
    args = parser.parse_args(argv)

    try:
        if args.command == "plot":
            out = args.out or str(Path(args.csv).with_suffix(".svg"))
            run_plot(args.csv, out)
            print(f"wrote {out}")
            return 0
        cfg = _load(args)
        if args.command == "solve":
            out = _out_path(cfg, "solve")
            stats = run_solve(cfg, out)
            print(f"wrote {out} ({stats['points']} points, max error "
                  f"{stats['max_error']:.6g}, {stats['wall_time']:.2f}s)")
        elif args.command == "poles":
            out = _out_path(cfg, "poles")
            stats = run_poles(cfg, out)
            print(f"wrote {out} ({stats['real_roots']} real roots, "
                  f"{stats['wall_time']:.2f}s)")
        elif args.command == "residues":
            out = _out_path(cfg, "residues")
            stats = run_residues(cfg, out)
            print(f"wrote {out} ({stats['rows']} rows, "
                  f"{stats['wall_time']:.2f}s)")
        elif args.command == "convergence":
            if getattr(args, "n_list", None):
                try:
                    n_list = [int(v) for v in args.n_list.split(",") if v.strip()]
                except ValueError:
                    raise ConfigError(f"cannot parse N list {args.n_list!r}")
            else:
                n_list = [cfg.n]
            out = _out_path(cfg, "convergence")
            stats = run_convergence(cfg, n_list, out)
            print(f"wrote {out} (slopes {stats['slopes']}, "
                  f"{stats['wall_time']:.2f}s)")
        return 0
    except (ConfigError, ParseError) as exc:
        print(f"nddelf: config error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, RefinementError, ArithmeticError, ValueError) as exc:
        print(f"nddelf: solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
