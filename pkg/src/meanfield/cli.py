"""Command-line front end: config ingestion, experiment orchestration, and
plot-data emission.

No interactive UI: runs consume a JSON config (or equivalent flags) and emit
RFC-4180 CSV time series, a JSON summary, and a plain-text manifest echoing
the resolved configuration and package version.  Re-running a config with
the same base seed reproduces every CSV byte for byte.  Unknown config keys
and missing seeds are hard errors.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, experiments, stats
from .core import (
    ConfigError,
    CwParams,
    DisorderLaw,
    KuramotoParams,
    SeedSpec,
    SpaceScale,
    TimeScale,
)
from .cw_analysis import (
    critical_beta,
    cw_clt_parameters,
    cw_stationary_states,
    linearized_cw,
    mckean_vlasov_cw,
    tilted_profile,
)
from .kuramoto_analysis import (
    KuramotoDensity,
    kuramoto_clt_system,
    linearized_kuramoto,
    mckean_vlasov_kuramoto,
    theta_critical,
)
from .limits import LimitSdeSpec, SdeKind, StoppingKind, StoppingRule, simulate_limit

_COMMON_KEYS = {"model", "base_seed", "output_dir", "threads", "long_format"}
_MODEL_KEYS = {
    "cw": {"beta", "law", "n_particles", "t_end", "replicas", "n_times",
           "time_scale", "space_scale", "m_star"},
    "kuramoto": {"theta", "omega", "law", "n_particles", "t_end", "dt", "replicas",
                 "n_times", "time_scale", "h_max", "r_weight"},
    "limit": {"kind", "t_end", "dt", "n_paths", "omega", "law", "beta", "r_stop",
              "n_times"},
    "analysis": {"law", "beta", "omega", "truncation", "h_max"},
}


def _require(config: dict, key: str):
    if key not in config:
        raise ConfigError(f"missing required config key: {key!r}")
    return config[key]


def _validate_keys(config: dict) -> str:
    model = _require(config, "model")
    if model not in _MODEL_KEYS:
        raise ConfigError(f"unknown model {model!r}; expected one of {sorted(_MODEL_KEYS)}")
    allowed = _COMMON_KEYS | _MODEL_KEYS[model]
    unknown = set(config) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys for model {model!r}: {sorted(unknown)}")
    _require(config, "base_seed")
    return model


def _parse_law(value) -> DisorderLaw:
    if isinstance(value, str):
        return DisorderLaw.parse(value)
    if isinstance(value, (list, tuple)):
        return DisorderLaw(tuple((float(v), float(w)) for v, w in value))
    raise ConfigError(f"cannot interpret law spec {value!r}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_manifest(outdir: Path, config: dict, columns: list[str]) -> None:
    lines = [
        f"meanfield version = {__version__}",
        f"resolved config = {json.dumps(config, sort_keys=True)}",
        f"csv columns = {','.join(columns)}",
        "time column = t_observed (observed units after time rescaling)",
    ]
    (outdir / "manifest.txt").write_text("\n".join(lines) + "\n")


def _write_series_csv(
    outdir: Path,
    times: np.ndarray,
    per_replica: list[np.ndarray],
    labels: tuple[str, ...],
    long_format: bool,
) -> list[str]:
    columns = ["t_observed", *labels]
    if long_format:
        path = outdir / "trajectories.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["replica", *columns])
            for r, values in enumerate(per_replica):
                for i, t in enumerate(times):
                    writer.writerow([r, _fmt(t), *(_fmt(v) for v in values[i])])
    else:
        for r, values in enumerate(per_replica):
            path = outdir / f"trajectory_r{r:04d}.csv"
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(columns)
                for i, t in enumerate(times):
                    writer.writerow([_fmt(t), *(_fmt(v) for v in values[i])])
    return columns


def _run_cw_config(config: dict, outdir: Path) -> dict:
    law = _parse_law(_require(config, "law"))
    params = CwParams(float(_require(config, "beta")), law, int(_require(config, "n_particles")))
    t_end = float(_require(config, "t_end"))
    replicas = int(_require(config, "replicas"))
    n_times = int(config.get("n_times", 11))
    time_scale = TimeScale(config.get("time_scale", "unit"))
    space_scale = SpaceScale(config.get("space_scale", SpaceScale.SQRT_N.value))
    m_star = float(config.get("m_star", 0.0))
    seed = SeedSpec(int(config["base_seed"]))
    threads = config.get("threads")

    spec = linearized_cw(params, m_star)
    observed = np.linspace(0.0, t_end, n_times)
    values = experiments.run_cw_fluctuation_ensemble(
        params, spec.basis, observed, time_scale, replicas, seed, threads, m_star
    )
    if space_scale is SpaceScale.SQRT_N:
        values = values * float(params.n_particles) ** 0.25
    labels = tuple(f"Y{i}" for i in range(spec.basis.shape[0]))
    columns = _write_series_csv(
        outdir, observed, list(values), labels, bool(config.get("long_format", False))
    )
    summary = {
        "model": "cw",
        "eigenvalues": spec.eigenvalues.tolist(),
        "replicas": replicas,
        "n_events_scale": params.n_particles * t_end * time_scale.factor(params.n_particles),
        "final_time_values_mean": values[:, -1, :].mean(axis=0).tolist(),
    }
    return {"summary": summary, "columns": columns}


def _run_kuramoto_config(config: dict, outdir: Path) -> dict:
    law = _parse_law(_require(config, "law"))
    params = KuramotoParams(
        float(_require(config, "theta")),
        float(_require(config, "omega")),
        law,
        int(_require(config, "n_particles")),
    )
    t_end = float(_require(config, "t_end"))
    dt = float(_require(config, "dt"))
    replicas = int(_require(config, "replicas"))
    n_times = int(config.get("n_times", 11))
    h_max = int(config.get("h_max", 16))
    r_weight = float(config.get("r_weight", 2.0))
    seed = SeedSpec(int(config["base_seed"]))
    observed = np.linspace(0.0, t_end, n_times)
    values, labels = experiments.run_kuramoto_fluctuation_ensemble(
        params, observed, dt, replicas, seed, h_max, r_weight, config.get("threads")
    )
    columns = _write_series_csv(
        outdir, observed, list(values), labels, bool(config.get("long_format", False))
    )
    summary = {
        "model": "kuramoto",
        "replicas": replicas,
        "labels": list(labels),
        "final_norm2_mean": float(values[:, -1, labels.index("norm2_r")].mean()),
    }
    return {"summary": summary, "columns": columns}


def _run_limit_config(config: dict, outdir: Path) -> dict:
    kind = SdeKind(_require(config, "kind"))
    if kind is SdeKind.KURAMOTO_CUBIC_2D:
        spec = LimitSdeSpec.kuramoto_cubic(float(_require(config, "omega")))
    elif kind is SdeKind.CW_RANDOM_SLOPE:
        spec = LimitSdeSpec.cw_random_slope(
            _parse_law(_require(config, "law")), float(_require(config, "beta"))
        )
    elif kind is SdeKind.CW_CUBIC_1D:
        spec = LimitSdeSpec.cw_cubic()
    else:
        raise ConfigError("linear_ou_system runs are driven programmatically")
    stopping = StoppingRule()
    if config.get("r_stop") is not None:
        stopping = StoppingRule(StoppingKind.RADIAL, float(config["r_stop"]))
    paths = simulate_limit(
        spec,
        float(_require(config, "t_end")),
        float(_require(config, "dt")),
        int(_require(config, "n_paths")),
        SeedSpec(int(config["base_seed"])),
        stopping,
        n_snapshots=int(config.get("n_times", 11)),
    )
    labels = tuple(f"V{i+1}" for i in range(paths.values.shape[2]))
    columns = _write_series_csv(
        outdir, paths.times, list(paths.values), labels,
        bool(config.get("long_format", False)),
    )
    summary = {
        "model": "limit",
        "kind": kind.value,
        "coefficients": spec.coefficient_table(),
        "stopped_fraction": paths.stopped_fraction(float(config["t_end"])),
    }
    return {"summary": summary, "columns": columns}


def _analysis_summary(law: DisorderLaw, beta: float | None, omega: float | None,
                      truncation: int = 32) -> dict:
    out: dict = {"law": [[v, w] for v, w in law.atoms]}
    beta_c = critical_beta(law)
    out["beta_c"] = beta_c
    use_beta = beta if beta is not None else beta_c
    if use_beta is not None:
        params = CwParams(use_beta, law, 2)
        states = cw_stationary_states(params)
        out["beta"] = use_beta
        out["stationary_m"] = [
            {"m_star": s.m_star, "stability": s.stability.value, "gap": s.criticality_gap}
            for s in states
        ]
        spec = linearized_cw(params, 0.0)
        clt = cw_clt_parameters(spec, params, 0.0)
        out["cw_spectrum"] = spec.eigenvalues.tolist()
        out["cw_eigenbasis"] = spec.basis.tolist()
        out["clt"] = {
            "cov_x0": clt.cov_x0.tolist(),
            "cov_h": clt.cov_h.tolist(),
            "cov_hx0": clt.cov_hx0.tolist(),
            "noise": clt.noise.tolist(),
            "drift_rates": clt.drift_rates.tolist(),
        }
    if omega is not None:
        tc = theta_critical(omega, law)
        out["theta_c"] = tc.theta_c
        out["theta_c_effective"] = tc.effective
        if law.is_two_point_unit:
            kp = KuramotoParams(1.0 + 4.0 * omega**2, omega, law, 2)
            kspec = linearized_kuramoto(kp, truncation)
            top = kspec.eigenvalues[:12]
            out["kuramoto_spectrum_top"] = [[z.real, z.imag] for z in top]
    return out


def _emit(outdir: Path, config: dict, result: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "summary.json").write_text(
        json.dumps(result["summary"], indent=2, sort_keys=True) + "\n"
    )
    _write_manifest(outdir, config, result.get("columns", []))


def run_config(config: dict) -> int:
    """Execute a resolved config dict; returns the process exit status."""
    model = _validate_keys(config)
    outdir = Path(config.get("output_dir", "out"))
    outdir.mkdir(parents=True, exist_ok=True)
    if model == "cw":
        result = _run_cw_config(config, outdir)
    elif model == "kuramoto":
        result = _run_kuramoto_config(config, outdir)
    elif model == "limit":
        result = _run_limit_config(config, outdir)
    else:
        law = _parse_law(_require(config, "law"))
        summary = _analysis_summary(
            law,
            config.get("beta"),
            config.get("omega"),
            int(config.get("truncation", 32)),
        )
        result = {"summary": summary, "columns": []}
    _emit(outdir, config, result)
    return 0


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Disordered mean-field spin and rotator systems: simulation and
    numerical verification of their scaling limits."""


@main.command("run")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def run_cmd(config_path: str) -> None:
    """Execute a JSON config file (schema in docs/config-schema.json)."""
    try:
        config = json.loads(Path(config_path).read_text(encoding="utf-8"))
        code = run_config(config)
    except (ConfigError, json.JSONDecodeError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)
    sys.exit(code)


@main.command("analyze")
@click.option("--model", type=click.Choice(["cw", "kuramoto"]), default="cw")
@click.option("--law", "law_text", default="0:1", help="atoms as 'v:w,v:w,...'")
@click.option("--beta", type=float, default=None)
@click.option("--omega", type=float, default=None)
@click.option("--output-dir", type=click.Path(), default=None)
def analyze_cmd(model: str, law_text: str, beta: float | None, omega: float | None,
                output_dir: str | None) -> None:
    """Print critical couplings, spectra and fluctuation parameters."""
    try:
        law = DisorderLaw.parse(law_text)
        if model == "kuramoto" and omega is None:
            omega = 0.25
        summary = _analysis_summary(law, beta, omega)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(summary, indent=2, sort_keys=True))
    if output_dir:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "analysis.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sys.exit(0)


@main.command("simulate-cw")
@click.option("--beta", type=float, required=True)
@click.option("--law", "law_text", required=True)
@click.option("--n-particles", type=int, required=True)
@click.option("--t-end", type=float, required=True)
@click.option("--replicas", type=int, default=1)
@click.option("--base-seed", type=int, required=True)
@click.option("--time-scale", type=click.Choice([s.value for s in TimeScale]), default="unit")
@click.option("--space-scale", type=click.Choice([s.value for s in SpaceScale]),
              default=SpaceScale.SQRT_N.value)
@click.option("--n-times", type=int, default=11)
@click.option("--threads", type=int, default=None)
@click.option("--long-format", is_flag=True)
@click.option("--output-dir", type=click.Path(), default="out")
def simulate_cw_cmd(**kw) -> None:
    """Simulate the spin model and write fluctuation trajectories."""
    config = {
        "model": "cw",
        "beta": kw["beta"],
        "law": kw["law_text"],
        "n_particles": kw["n_particles"],
        "t_end": kw["t_end"],
        "replicas": kw["replicas"],
        "base_seed": kw["base_seed"],
        "time_scale": kw["time_scale"],
        "space_scale": kw["space_scale"],
        "n_times": kw["n_times"],
        "long_format": kw["long_format"],
        "output_dir": kw["output_dir"],
    }
    if kw["threads"] is not None:
        config["threads"] = kw["threads"]
    try:
        sys.exit(run_config(config))
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)


@main.command("simulate-kuramoto")
@click.option("--theta", type=float, required=True)
@click.option("--omega", type=float, required=True)
@click.option("--law", "law_text", default="1:0.5,-1:0.5")
@click.option("--n-particles", type=int, required=True)
@click.option("--t-end", type=float, required=True)
@click.option("--dt", type=float, default=1e-2)
@click.option("--replicas", type=int, default=1)
@click.option("--base-seed", type=int, required=True)
@click.option("--h-max", type=int, default=16)
@click.option("--n-times", type=int, default=11)
@click.option("--threads", type=int, default=None)
@click.option("--long-format", is_flag=True)
@click.option("--output-dir", type=click.Path(), default="out")
def simulate_kuramoto_cmd(**kw) -> None:
    """Simulate the rotator model and write fluctuation trajectories."""
    config = {
        "model": "kuramoto",
        "theta": kw["theta"],
        "omega": kw["omega"],
        "law": kw["law_text"],
        "n_particles": kw["n_particles"],
        "t_end": kw["t_end"],
        "dt": kw["dt"],
        "replicas": kw["replicas"],
        "base_seed": kw["base_seed"],
        "h_max": kw["h_max"],
        "n_times": kw["n_times"],
        "long_format": kw["long_format"],
        "output_dir": kw["output_dir"],
    }
    if kw["threads"] is not None:
        config["threads"] = kw["threads"]
    try:
        sys.exit(run_config(config))
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)


@main.command("mckean-vlasov")
@click.option("--model", type=click.Choice(["cw", "kuramoto"]), required=True)
@click.option("--law", "law_text", required=True)
@click.option("--beta", type=float, default=None)
@click.option("--theta", type=float, default=None)
@click.option("--omega", type=float, default=None)
@click.option("--t-end", type=float, default=10.0)
@click.option("--dt", type=float, default=1e-3)
@click.option("--m0", type=float, default=0.2, help="initial magnetization (cw)")
@click.option("--truncation", type=int, default=32)
@click.option("--output-dir", type=click.Path(), default="out")
def mckean_vlasov_cmd(**kw) -> None:
    """Integrate a macroscopic evolution and write the trajectory CSV."""
    try:
        law = DisorderLaw.parse(kw["law_text"])
        outdir = Path(kw["output_dir"])
        outdir.mkdir(parents=True, exist_ok=True)
        if kw["model"] == "cw":
            if kw["beta"] is None:
                raise ConfigError("cw evolution needs --beta")
            params = CwParams(kw["beta"], law, 2)
            q0 = tilted_profile(kw["beta"], law, kw["m0"])
            times, tables = mckean_vlasov_cw(q0, params, kw["t_end"], kw["dt"],
                                             store_every=max(1, int(0.1 / kw["dt"])))
            mags = ((tables[:, 0, :] - tables[:, 1, :]) * law.weights[None, :]).sum(axis=1)
            with (outdir / "mckean_vlasov.csv").open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t_observed", "magnetization"])
                for t, m in zip(times, mags):
                    writer.writerow([_fmt(t), _fmt(m)])
            summary = {"model": "cw", "final_magnetization": float(mags[-1])}
        else:
            if kw["theta"] is None or kw["omega"] is None:
                raise ConfigError("kuramoto evolution needs --theta and --omega")
            params = KuramotoParams(kw["theta"], kw["omega"], law, 2)
            q0 = KuramotoDensity.uniform(law, kw["truncation"])
            times, snaps = mckean_vlasov_kuramoto(q0, params, kw["t_end"], kw["dt"],
                                                  store_every=max(1, int(0.1 / kw["dt"])))
            c1 = np.abs((law.weights[None, :] * snaps[:, :, 0]).sum(axis=1))
            with (outdir / "mckean_vlasov.csv").open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t_observed", "abs_c1_total"])
                for t, v in zip(times, c1):
                    writer.writerow([_fmt(t), _fmt(v)])
            summary = {"model": "kuramoto", "final_abs_c1": float(c1[-1])}
        (outdir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)
    sys.exit(0)


@main.command("limit-sde")
@click.option("--kind", type=click.Choice([k.value for k in SdeKind]), required=True)
@click.option("--omega", type=float, default=None)
@click.option("--law", "law_text", default=None)
@click.option("--beta", type=float, default=None)
@click.option("--t-end", type=float, required=True)
@click.option("--dt", type=float, default=1e-3)
@click.option("--n-paths", type=int, default=100)
@click.option("--r-stop", type=float, default=None)
@click.option("--base-seed", type=int, required=True)
@click.option("--n-times", type=int, default=11)
@click.option("--long-format", is_flag=True)
@click.option("--output-dir", type=click.Path(), default="out")
def limit_sde_cmd(**kw) -> None:
    """Sample a limiting diffusion and write path CSVs."""
    config = {
        "model": "limit",
        "kind": kw["kind"],
        "t_end": kw["t_end"],
        "dt": kw["dt"],
        "n_paths": kw["n_paths"],
        "base_seed": kw["base_seed"],
        "n_times": kw["n_times"],
        "long_format": kw["long_format"],
        "output_dir": kw["output_dir"],
    }
    for key in ("omega", "beta", "r_stop"):
        if kw[key] is not None:
            config[key] = kw[key]
    if kw["law_text"] is not None:
        config["law"] = kw["law_text"]
    try:
        sys.exit(run_config(config))
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)


@main.command("verify")
@click.argument("experiment", type=click.Choice(sorted(experiments.EXPERIMENTS)))
@click.option("--base-seed", type=int, default=2026)
@click.option("--omega", type=float, default=None, help="frequency-scale override (rotator experiments)")
@click.option("--threads", type=int, default=None)
@click.option("--output-dir", type=click.Path(), default="out")
def verify_cmd(experiment: str, base_seed: int, omega: float | None,
               threads: int | None, output_dir: str) -> None:
    """Run a named verification experiment and write its verdict JSON.

    Exits 0 when the verdict passes and 2 when it fails."""
    fn = experiments.EXPERIMENTS[experiment]
    kwargs: dict = {"seed": SeedSpec(base_seed)}
    if experiment in ("thm-kuramoto-explosive", "thm-kuramoto-critical") and omega is not None:
        kwargs["omega"] = omega
    if experiment in ("clt-subcritical", "thm-cw-critical-hom",
                      "thm-cw-critical-disordered", "thm-kuramoto-critical",
                      "performance") and threads is not None:
        kwargs["threads"] = threads
    if experiment in ("constants",):
        kwargs = {}
    result = fn(**kwargs)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"verdict_{experiment}.json").write_text(
        json.dumps(result.as_json(), indent=2, sort_keys=True) + "\n"
    )
    click.echo(json.dumps(result.as_json(), indent=2, sort_keys=True))
    sys.exit(0 if result.passed else 2)


@main.command("ensemble")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--replicas", type=int, default=None, help="override replica count")
def ensemble_cmd(config_path: str, replicas: int | None) -> None:
    """Run a config as an ensemble (long-format CSV with a replica column)."""
    try:
        config = json.loads(Path(config_path).read_text(encoding="utf-8"))
        config["long_format"] = True
        if replicas is not None:
            config["replicas"] = replicas
        sys.exit(run_config(config))
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
