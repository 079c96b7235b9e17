"""Command-line front end: one subcommand per analysis pipeline.

``simulate`` runs the kinetic exchange model, ``fp`` solves the
drift-diffusion income equation, ``fit`` extracts the two-class
parameters from data, and ``gini`` turns country panels into Lorenz
curves and a Gini time series with saturation detection.

All results go to files in --out: plot-ready two-column CSV data plus a
single ``report.json`` per run.  Runs are deterministic given their
options (and seed), and rerunning overwrites outputs bit-identically;
diagnostics go to stderr only.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

import click
import numpy as np

from . import classfit, fokker_planck as fp_mod, inequality, ingest, kinetic
from .core import MoneySample, bin_density, build_ccdf

CLI_RULES = {
    "fixed": "fixed_amount",
    "random_fraction": "random_fraction",
    "random_split": "random_split",
}


def _write_atomic(path: Path, content: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_columns(path: Path, header: tuple[str, str], cols):
    a, b = cols
    lines = [f"{header[0]},{header[1]}"]
    lines += [f"{x!r},{y!r}" for x, y in zip(np.asarray(a).tolist(), np.asarray(b).tolist())]
    _write_atomic(path, "\n".join(lines) + "\n")


def _write_report(path: Path, payload: dict):
    _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _info(msg: str):
    click.echo(msg, err=True)


@click.group()
def main():
    """Money-exchange simulation, income dynamics, and inequality analytics."""


@main.command()
@click.option("--agents", type=int, required=True, help="Number of agents N.")
@click.option("--money", type=float, required=True, help="Total money M.")
@click.option(
    "--rule",
    type=click.Choice(sorted(CLI_RULES)),
    required=True,
    help="Exchange rule.",
)
@click.option("--dm", type=float, default=None, help="Transfer amount for --rule fixed.")
@click.option("--steps", type=int, required=True, help="Number of transactions.")
@click.option("--seed", type=int, required=True, help="RNG seed (runs are reproducible).")
@click.option("--entropy-every", type=int, default=None, help="Entropy sampling stride (default steps/100).")
@click.option("--bins", type=int, default=50, show_default=True, help="Histogram/entropy bins.")
@click.option("--grid-factor", type=float, default=10.0, show_default=True, help="Entropy grid spans [0, factor*M/N].")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
def simulate(agents, money, rule, dm, steps, seed, entropy_every, bins, grid_factor, out):
    """Kinetic exchange run: histogram, entropy series, exponential check."""
    try:
        exchange = kinetic.ExchangeRule(kind=CLI_RULES[rule], dm=dm)
        result = kinetic.run(
            agents, money, exchange, steps, seed,
            entropy_every=entropy_every, bins=bins, grid_factor=grid_factor,
        )
    except ValueError as err:
        raise click.ClickException(str(err)) from err

    out_path = _out_dir(out)
    balances = result.final.balances
    edges = np.linspace(0.0, max(balances.max(), grid_factor * result.temperature) * (1 + 1e-12), bins + 1)
    hist = bin_density(MoneySample(balances), edges)
    _write_columns(out_path / "histogram.csv", ("balance", "mass"), (hist.centers, hist.masses))
    _write_columns(
        out_path / "entropy.csv", ("step", "entropy"),
        (result.entropy_steps, result.entropy_values),
    )
    ks = kinetic.ks_exponential(balances, result.temperature)
    _write_report(out_path / "report.json", {
        "command": "simulate",
        "agents": agents,
        "money": money,
        "rule": rule,
        "dm": dm,
        "steps": steps,
        "seed": seed,
        "bins": bins,
        "grid_factor": grid_factor,
        "temperature": result.temperature,
        "ks_vs_exponential": ks,
        "entropy_final": float(result.entropy_values[-1]),
    })
    _info(f"simulate: KS vs exponential(T={result.temperature:g}) = {ks:.5f}")
    _info(f"simulate: wrote histogram.csv entropy.csv report.json to {out_path}")


@main.command()
@click.option("--a0", type=float, required=True, help="Additive drift magnitude.")
@click.option("--a1", type=float, default=0.0, show_default=True, help="Multiplicative drift rate.")
@click.option("--b0", type=float, required=True, help="Additive diffusion.")
@click.option("--b2", type=float, default=0.0, show_default=True, help="Multiplicative diffusion rate.")
@click.option("--rmax", type=float, required=True, help="Top of the income grid.")
@click.option("--points", type=int, default=20001, show_default=True, help="Grid points.")
@click.option(
    "--grid", "grid_kind", type=click.Choice(["uniform", "geometric"]),
    default="uniform", show_default=True,
)
@click.option("--rmin", type=float, default=1e-3, show_default=True, help="First positive point of a geometric grid.")
@click.option("--evolve-steps", type=int, default=0, show_default=True,
              help="If > 0, also relax a narrow initial bump at r=b0/a0 and record its L1 distance to the stationary state.")
@click.option("--dt", type=float, default=None, help="Time step for --evolve-steps (default: 0.98 of the stability bound).")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
def fp(a0, a1, b0, b2, rmax, points, grid_kind, rmin, evolve_steps, dt, out):
    """Stationary income density, tail exponent, optional relaxation."""
    try:
        model = fp_mod.DriftDiffusionModel(a0=a0, a1=a1, b0=b0, b2=b2)
        grid = fp_mod.make_grid(rmax, points, kind=grid_kind, r_min=rmin)
        density = fp_mod.stationary_density(model, grid)
    except ValueError as err:
        raise click.ClickException(str(err)) from err

    out_path = _out_dir(out)
    _write_columns(out_path / "density.csv", ("r", "density"), (density.grid, density.values))

    if model.b2 > 0:
        alpha = fp_mod.predicted_tail_exponent(model)
        regime = "power_law_tail"
        _info(f"fp: cumulative tail exponent alpha = {alpha:g}")
    else:
        alpha = None
        regime = "exponential"
        _info(f"fp: exponential regime, T = {model.temperature:g}")

    report = {
        "command": "fp",
        "a0": a0, "a1": a1, "b0": b0, "b2": b2,
        "rmax": rmax, "points": points, "grid": grid_kind,
        "temperature": model.temperature,
        "tail_exponent": alpha,
        "regime": regime,
    }

    if evolve_steps > 0:
        try:
            relax = _relaxation_trajectory(model, grid, density, evolve_steps, dt)
        except ValueError as err:
            raise click.ClickException(str(err)) from err
        _write_columns(out_path / "relaxation.csv", ("time", "l1_distance"), relax)
        report["evolve_steps"] = evolve_steps
        report["final_l1_distance"] = float(relax[1][-1])

    _write_report(out_path / "report.json", report)
    _info(f"fp: wrote density.csv report.json to {out_path}")


def _relaxation_trajectory(model, grid, stationary, steps, dt):
    if dt is None:
        dt = 0.98 * fp_mod.stability_limit(model, grid)
    h = grid[1] - grid[0]
    bump = np.exp(-0.5 * ((grid - model.temperature) / (5 * h)) ** 2)
    state = fp_mod.DensityOnGrid(grid, bump / np.trapezoid(bump, grid))
    snapshots = max(1, min(50, steps))
    stride = steps // snapshots
    times = [0.0]
    dists = [float(np.trapezoid(np.abs(state.values - stationary.values), grid))]
    done = 0
    while done < steps:
        k = min(stride, steps - done) if stride else steps - done
        state = fp_mod.evolve(model, state, dt, k)
        done += k
        times.append(done * dt)
        dists.append(float(np.trapezoid(np.abs(state.values - stationary.values), grid)))
    return np.array(times), np.array(dists)


def _load_input(path: Path, kind: str):
    text = path.read_text()
    if kind == "auto":
        for _, cells in ingest._rows(text):
            kind = "ccdf" if len(cells) == 2 else "samples"
            break
        else:
            raise click.ClickException(f"{path}: empty input")
    if kind == "ccdf":
        return ingest.parse_ccdf(text, source=str(path))
    sample = ingest.parse_samples(text, source=str(path))
    return build_ccdf(sample)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--kind", type=click.Choice(["auto", "samples", "ccdf"]), default="auto", show_default=True,
              help="Input format; auto looks at the column count.")
@click.option("--windows", type=str, default=None,
              help="Fit windows as 'bulk_lo,bulk_hi,tail_lo,tail_hi' (default: percentile-based).")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
def fit(input_path, kind, windows, out):
    """Two-class fit {T, alpha, r*} of an income dataset."""
    path = Path(input_path)
    try:
        ccdf = _load_input(path, kind)
        window_obj = None
        if windows is not None:
            parts = [float(p) for p in windows.split(",")]
            if len(parts) != 4:
                raise ValueError("--windows needs four comma-separated numbers")
            window_obj = classfit.FitWindow(bulk=(parts[0], parts[1]), tail=(parts[2], parts[3]))
        report = classfit.fit_two_class(ccdf, window_obj)
    except ValueError as err:
        raise click.ClickException(str(err)) from err

    out_path = _out_dir(out)
    params = report.params
    _write_columns(
        out_path / "normalized_ccdf.csv", ("r_over_T", "c"),
        (ccdf.r / params.T, ccdf.c),
    )
    _write_report(out_path / "report.json", {
        "command": "fit",
        "input": str(path),
        "T": params.T,
        "alpha": params.alpha,
        "r_star": params.r_star,
        "mean_income": params.mean,
        "upper_income_share_f": params.f,
        "gini_two_class": inequality.gini_two_class(max(params.f, 0.0)),
        "population_below": report.population_below,
        "population_above": report.population_above,
        "tail_absent": report.tail_absent,
        "bulk_rms": report.bulk_rms,
        "tail_rms": report.tail_rms,
        "windows": {
            "bulk": list(report.windows.bulk),
            "tail": list(report.windows.tail),
        },
    })
    if report.tail_absent:
        _info(f"fit: T={params.T:.6g}, no resolvable power-law tail (f={params.f:+.4f})")
    else:
        r_star_text = "undetermined" if params.r_star is None else f"{params.r_star:.6g}"
        _info(
            f"fit: T={params.T:.6g} alpha={params.alpha:.4g} "
            f"r*={r_star_text} f={params.f:.4f}"
        )
    _info(f"fit: wrote normalized_ccdf.csv report.json to {out_path}")


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--year", type=int, default=None, help="Year label for a single-year panel.")
@click.option("--level", type=float, default=0.5, show_default=True, help="Saturation level.")
@click.option("--tol", type=float, default=0.02, show_default=True, help="Saturation band half-width.")
@click.option("--min-run", type=int, default=5, show_default=True, help="Minimum points in the plateau.")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
def gini(input_path, year, level, tol, min_run, out):
    """Lorenz curves, Gini series, and saturation report for a country panel."""
    path = Path(input_path)
    try:
        by_year = ingest.parse_country_panel_years(path.read_text(), source=str(path))
    except ValueError as err:
        raise click.ClickException(str(err)) from err

    if list(by_year) == [None]:
        by_year = {year: by_year[None]}
    elif year is not None:
        if year not in by_year:
            raise click.ClickException(f"{path}: year {year} not present in panel")
        by_year = {year: by_year[year]}

    out_path = _out_dir(out)
    series = {}
    for yr, records in by_year.items():
        try:
            curve = inequality.lorenz_weighted(records)
        except ValueError as err:
            raise click.ClickException(
                f"{path}: year {yr}: {err}" if yr is not None else f"{path}: {err}"
            ) from err
        g = inequality.gini_from_lorenz(curve)
        series[yr] = g
        name = f"lorenz_{yr}.csv" if yr is not None else "lorenz.csv"
        _write_columns(out_path / name, ("population_share", "quantity_share"), (curve.x, curve.y))

    x_ref = np.linspace(0.0, 1.0, 1001)
    _write_columns(
        out_path / "exponential_lorenz.csv", ("population_share", "quantity_share"),
        (x_ref, inequality.exponential_lorenz(x_ref)),
    )

    report = {
        "command": "gini",
        "input": str(path),
        "level": level,
        "tol": tol,
        "min_run": min_run,
        "gini_by_year": {
            (str(yr) if yr is not None else "unlabeled"): g for yr, g in series.items()
        },
        "saturation": None,
    }

    years = [yr for yr in series if yr is not None]
    if len(years) >= min_run:
        gs = inequality.GiniSeries(
            np.array(sorted(years)),
            np.array([series[yr] for yr in sorted(years)]),
            label=str(path),
        )
        _write_columns(out_path / "gini_series.csv", ("year", "gini"), (gs.years, gs.values))
        sat = inequality.detect_saturation(gs, level=level, tol=tol, min_run=min_run)
        report["saturation"] = {
            "saturated": sat.saturated,
            "year": sat.year,
            "run_length": sat.run_length,
            "pre_slope": sat.pre_slope,
        }
        if sat.saturated:
            _info(f"gini: saturation at {level:g} from year {sat.year}")
        else:
            _info("gini: no saturation")
    else:
        report["saturation_note"] = (
            f"saturation analysis needs at least min_run={min_run} years, got {len(years)}"
        )
        _info("gini: too few years for saturation analysis")

    _write_report(out_path / "report.json", report)
    _info(f"gini: wrote {len(series)} Lorenz curve(s) and report.json to {out_path}")


if __name__ == "__main__":
    main()
