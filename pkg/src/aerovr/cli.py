"""Batch driver for the design-space exploration pipeline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Stdout is line-oriented key=value for machine parsing.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import demo as demo_mod
from . import linkage
from .dataset import (DomainSpec, SyntheticOracle, evaluate_oracle,
                      load_design_table, sample_uniform_doe)
from .errors import DataError, NumericalError
from .serialize import plot_to_json, subspace_to_json
from .service import (ServiceConfig, compute_bundle, load_data_root,
                      run_service, state_to_dict, BundleDatasetAdapter)
from .surrogate import (build_summary_plot, covariance_analytic,
                        eigendecompose, finalize_subspace, fit_quadratic,
                        fit_ridge_profile, predict_ridge, principal_angle,
                        quadratic_basis_size)

SPAN_SECTIONS = (0, 25, 50, 75, 100)
DOF_NAMES = ("axial", "tangential", "rotation", "le_recamber", "te_recamber")


@click.group()
def cli():
    """Design-space exploration: active subspaces, summary plots, linked views."""


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--domain", "domain_path", required=True, type=click.Path())
def ingest(input_path, domain_path):
    """Validate a design table and report its shape."""
    domain = DomainSpec.from_json(domain_path)
    table = load_design_table(input_path, domain)
    click.echo(f"n={table.n}")
    click.echo(f"d={table.d}")
    click.echo(f"qois={','.join(table.qoi_names)}")
    click.echo(f"basis_size={quadratic_basis_size(table.d)}")


def _fit_pipeline(input_path, domain_path, qois, max_m, degree):
    domain = DomainSpec.from_json(domain_path)
    table = load_design_table(input_path, domain)
    qois = list(qois) or table.qoi_names
    bundle = compute_bundle(table, qois, dataset_id="cli",
                            max_m=max_m, degree=degree)
    return table, qois, bundle


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--domain", "domain_path", required=True, type=click.Path())
@click.option("--qoi", "qois", multiple=True)
@click.option("--out-dir", default=".", type=click.Path())
@click.option("--max-m", default=2, show_default=True)
@click.option("--degree", default=2, show_default=True)
def fit(input_path, domain_path, qois, out_dir, max_m, degree):
    """Run the pipeline and export subspace + plot JSON per qoi."""
    _, qois, bundle = _fit_pipeline(input_path, domain_path, qois, max_m, degree)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for qoi in qois:
        sub_path = out / f"subspace-{qoi}.json"
        plot_path = out / f"plot-{qoi}.json"
        sub_path.write_text(subspace_to_json(qoi, bundle.subspaces[qoi]))
        plot_path.write_text(plot_to_json(bundle.plots[qoi]))
        click.echo(f"subspace_{qoi}={sub_path}")
        click.echo(f"plot_{qoi}={plot_path}")
        click.echo(f"m_{qoi}={bundle.subspaces[qoi].m}")
        click.echo(f"rmse_{qoi}={bundle.profiles[qoi].training_rmse:.6e}")


@cli.command("export-plots")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--domain", "domain_path", required=True, type=click.Path())
@click.option("--qoi", "qois", multiple=True)
@click.option("--out-dir", default=".", type=click.Path())
@click.option("--max-m", default=2, show_default=True)
@click.option("--degree", default=2, show_default=True)
def export_plots(input_path, domain_path, qois, out_dir, max_m, degree):
    """Export summary-plot JSON only."""
    _, qois, bundle = _fit_pipeline(input_path, domain_path, qois, max_m, degree)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for qoi in qois:
        plot_path = out / f"plot-{qoi}.json"
        plot_path.write_text(plot_to_json(bundle.plots[qoi]))
        click.echo(f"plot_{qoi}={plot_path}")


def _variable_labels(d: int) -> list[str]:
    labels = [f"{dof}_{span}" for span in SPAN_SECTIONS for dof in DOF_NAMES]
    return labels[:d] if d <= len(labels) else [f"x{i+1}" for i in range(d)]


@cli.command("verify-synthetic")
@click.option("--seed", default=42, show_default=True)
@click.option("--d", "dim", default=25, show_default=True)
@click.option("--n", "n_samples", default=548, show_default=True)
@click.option("--noise-sd", default=0.0, show_default=True)
@click.option("--degree", default=2, show_default=True)
def verify_synthetic(seed, dim, n_samples, noise_sd, degree):
    """End-to-end recovery check on oracles with known ridge structure."""
    if n_samples < quadratic_basis_size(dim):
        raise DataError(
            f"need at least {quadratic_basis_size(dim)} samples for d={dim}")
    click.echo(f"d={dim}")
    click.echo(f"n={n_samples}")
    click.echo(f"variables={','.join(_variable_labels(dim))}")
    directions = demo_mod.random_orthonormal(dim, 3, seed)
    angle_tol = 1e-6 if noise_sd == 0 else 0.05
    failures = []
    cases = [
        ("exact-ridge-1d", directions[:, :1], 1),
        ("exact-ridge-2d", directions[:, 1:3], 2),
    ]
    domain = DomainSpec.unit(dim)
    for kind, u, expect_m in cases:
        oracle = SyntheticOracle(kind, u, noise_sd, seed)
        table = sample_uniform_doe(domain, n_samples, seed=seed + 1)
        table = evaluate_oracle(oracle, table, "qoi")
        model = fit_quadratic(table, "qoi")
        subspace = finalize_subspace(eigendecompose(covariance_analytic(model)),
                                     max_m=2)
        angle = principal_angle(subspace.W1, u)
        lam = subspace.eigenvalues
        gap = lam[expect_m] / lam[expect_m - 1] if lam[expect_m - 1] > 0 else 0.0
        plot = build_summary_plot(table, subspace, "qoi")
        profile = fit_ridge_profile(plot, degree=degree)
        held_out = sample_uniform_doe(domain, 100, seed=seed + 2)
        pred = predict_ridge(profile, subspace, held_out.x)
        rmse = float(np.sqrt(np.mean(
            (pred - oracle.evaluate_clean(held_out.x)) ** 2)))
        click.echo(f"{kind}.m={subspace.m}")
        click.echo(f"{kind}.subspace_angle={angle:.3e}")
        click.echo(f"{kind}.eigenvalue_gap={gap:.3e}")
        click.echo(f"{kind}.held_out_rmse={rmse:.3e}")
        if subspace.m != expect_m:
            failures.append(f"{kind}: selected m={subspace.m}, expected {expect_m}")
        if angle > angle_tol:
            failures.append(f"{kind}: subspace angle {angle:.3e} > {angle_tol}")
        if noise_sd == 0:
            if gap > 1e-10:
                failures.append(f"{kind}: trailing eigenvalue ratio {gap:.3e} > 1e-10")
            if rmse > 1e-8:
                failures.append(f"{kind}: held-out rmse {rmse:.3e} > 1e-8")
    if failures:
        raise NumericalError("; ".join(failures))
    click.echo("status=ok")


@cli.command()
@click.option("--log", "log_path", required=True, type=click.Path())
@click.option("--data-root", envvar="AEROVR_DATA_ROOT", default=None,
              type=click.Path())
@click.option("--dataset", "dataset_id", default=None)
def replay(log_path, data_root, dataset_id):
    """Re-apply a JSON-lines session log and print the final state."""
    datasets = None
    if data_root:
        bundles = load_data_root(Path(data_root))
        datasets = {ds: BundleDatasetAdapter(b) for ds, b in bundles.items()}
        dataset_id = dataset_id or sorted(bundles)[0]
    if not dataset_id:
        raise DataError("replay needs --dataset or --data-root")
    state = linkage.replay_event_log(log_path, dataset_id, dataset=datasets)
    info = state_to_dict(state)
    click.echo(f"dataset_id={info['dataset_id']}")
    click.echo(f"selected_index={info['selected_index']}")
    click.echo(f"events={info['history_length']}")
    for pid, pose in info["plot_poses"].items():
        pos = ",".join(repr(v) for v in pose["position"])
        click.echo(f"pose_{pid}.position={pos}")
        flat = ",".join(str(v) for row in pose["orientation"] for v in row)
        click.echo(f"pose_{pid}.orientation={flat}")


@cli.command()
@click.option("--listen", default="127.0.0.1:8080", show_default=True)
@click.option("--data-root", envvar="AEROVR_DATA_ROOT", required=True,
              type=click.Path())
def serve(listen, data_root):
    """Start the JSON service."""
    run_service(ServiceConfig(listen_address=listen, data_root=Path(data_root)))


@cli.command("make-demo")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--d", "dim", default=6, show_default=True)
@click.option("--n", "n_samples", default=60, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--noise-sd", default=0.0, show_default=True)
@click.option("--no-geometry", is_flag=True, default=False)
def make_demo(out_dir, dim, n_samples, seed, noise_sd, no_geometry):
    """Generate a demo dataset directory (designs, qois, blade meshes)."""
    path = demo_mod.generate_demo_dataset(
        Path(out_dir), d=dim, n=n_samples, seed=seed, noise_sd=noise_sd,
        with_geometry=not no_geometry)
    click.echo(f"dataset={path}")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except DataError as exc:
        click.echo(f"error={exc}", err=True)
        sys.exit(2)
    except NumericalError as exc:
        click.echo(f"error={exc}", err=True)
        sys.exit(3)
    sys.exit(0)


if __name__ == "__main__":
    main()
