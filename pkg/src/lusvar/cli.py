"""Command-line pipeline: ingest, transform, fit, test, simulate.

Exit codes: 0 success, 2 configuration error, 3 numerical or
identification failure, 4 I/O error.

Outputs are JSON for machine-readable bundles and CSV for matrices and
plot-ready data; floats are serialized with full round-trip precision so
re-ingesting exported values reproduces them bit-exactly.  No plotting is
done here — the IRF CSV has one (horizon, point, lower, upper) row per
response pair and is intended for external tooling.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import impulse, simulation
from .errors import ConfigError, DataError, LuSvarError
from .inference import z_statistic
from .structural import ColumnSelection, estimate_structure
from .var import TimeSeriesPanel, build_design, check_stationarity, ols_fit

TRANSFORMS = ("none", "pct-change", "difference")


@dataclass
class SeriesSpec:
    path: str
    name: str
    column: str | None = None
    transform: str = "none"


@dataclass
class RunConfig:
    series: list[SeriesSpec] = field(default_factory=list)
    date_column: str | None = None
    aggregate: str = "none"            # "none" | "quarterly-mean"
    lag: int = 1
    jtuple: tuple[int, ...] = ()
    test_weight: list[float] | None = None
    horizons: int = impulse.DEFAULT_HORIZON
    level: float = 0.95
    seed: int = 0
    reps: int = 1000
    t_list: list[int] = field(default_factory=lambda: [100, 200, 500])
    dgp: object = "h0"                 # "h0" | "h1" | inline dict
    burn_in: int = simulation.DEFAULT_BURN_IN

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        cfg = cls()
        series = raw.get("series", [])
        for item in series:
            spec = SeriesSpec(
                path=item.get("path", ""),
                name=item.get("name") or item.get("column") or item.get("path", ""),
                column=item.get("column"),
                transform=item.get("transform", "none"),
            )
            if spec.transform not in TRANSFORMS:
                raise ConfigError(
                    f"unknown transform {spec.transform!r} for {spec.name}"
                )
            cfg.series.append(spec)
        cfg.date_column = raw.get("date_column")
        cfg.aggregate = raw.get("aggregate", "none")
        if cfg.aggregate not in ("none", "quarterly-mean"):
            raise ConfigError(f"unknown aggregate rule {cfg.aggregate!r}")
        cfg.lag = int(raw.get("lag", 1))
        cfg.jtuple = tuple(int(j) for j in raw.get("jtuple", ()))
        cfg.test_weight = raw.get("test_weight")
        cfg.horizons = int(raw.get("horizons", impulse.DEFAULT_HORIZON))
        cfg.level = float(raw.get("level", 0.95))
        cfg.seed = int(raw.get("seed", 0))
        sim = raw.get("simulation", {})
        cfg.reps = int(sim.get("reps", 1000))
        cfg.t_list = [int(t) for t in sim.get("t_list", [100, 200, 500])]
        cfg.dgp = sim.get("dgp", "h0")
        cfg.burn_in = int(sim.get("burn_in", simulation.DEFAULT_BURN_IN))
        if not 0.0 < cfg.level < 1.0:
            raise ConfigError(f"confidence level {cfg.level} not in (0, 1)")
        if cfg.lag < 1:
            raise ConfigError(f"lag must be >= 1, got {cfg.lag}")
        return cfg


def _read_one(spec: SeriesSpec, date_column: str | None) -> pd.Series:
    try:
        df = pd.read_csv(spec.path)
    except OSError as exc:
        raise DataError(f"cannot read {spec.path}: {exc}") from exc
    except (pd.errors.ParserError, ValueError) as exc:
        raise DataError(f"parse error in {spec.path}: {exc}") from exc
    if df.empty:
        raise DataError(f"{spec.path} has no rows")
    date_col = date_column or df.columns[0]
    if date_col not in df.columns:
        raise DataError(f"{spec.path}: no date column {date_col!r}")
    try:
        dates = pd.to_datetime(df[date_col])
    except (ValueError, TypeError) as exc:
        raise DataError(f"{spec.path}: bad dates: {exc}") from exc
    if not dates.is_monotonic_increasing:
        raise DataError(f"{spec.path}: dates are not in increasing order")
    value_col = spec.column
    if value_col is None:
        candidates = [c for c in df.columns if c != date_col]
        if len(candidates) != 1:
            raise DataError(
                f"{spec.path}: specify 'column', candidates are {candidates}"
            )
        value_col = candidates[0]
    if value_col not in df.columns:
        raise DataError(f"{spec.path}: no column {value_col!r}")
    values = pd.to_numeric(df[value_col], errors="coerce")
    if values.isna().any():
        bad = int(values.index[values.isna()][0]) + 2  # 1-based incl. header
        raise DataError(f"{spec.path}: missing/non-numeric value at line {bad}")
    s = pd.Series(values.to_numpy(), index=pd.DatetimeIndex(dates),
                  name=spec.name)
    return s


def aggregate_quarterly_mean(s: pd.Series) -> pd.Series:
    """Quarterly mean of a higher-frequency series (helper, documented rule)."""
    return s.resample("QS").mean()


def ingest(config: RunConfig) -> pd.DataFrame:
    """Read all series, inner-join on dates; warns on dropped rows."""
    if not config.series:
        raise ConfigError("no input series configured")
    columns = []
    for spec in config.series:
        s = _read_one(spec, config.date_column)
        if config.aggregate == "quarterly-mean":
            s = aggregate_quarterly_mean(s)
        columns.append(s)
    joined = pd.concat(columns, axis=1, join="inner")
    dropped = max(len(c) for c in columns) - len(joined)
    if dropped > 0:
        warnings.warn(f"inner join on dates dropped {dropped} row(s)")
    if joined.isna().any().any():
        raise DataError("missing values remain after joining")
    if len(joined) == 0:
        raise DataError("no common dates across input files")
    return joined


def transform_series(values: np.ndarray, kind: str) -> np.ndarray:
    """Apply one transform; output is one observation shorter than input."""
    x = np.asarray(values, dtype=float)
    if kind == "none":
        return x[1:]
    if kind == "pct-change":
        if np.any(x <= 0.0):
            raise LuSvarError(
                "pct-change requires strictly positive levels"
            )
        return (x[1:] / x[:-1] - 1.0) * 100.0
    if kind == "difference":
        return np.diff(x)
    raise ConfigError(f"unknown transform {kind!r}")


def transform_panel(df: pd.DataFrame, kinds: list[str]) -> pd.DataFrame:
    """Apply per-series transforms; all series drop the first row to stay aligned."""
    out = {
        name: transform_series(df[name].to_numpy(), kind)
        for name, kind in zip(df.columns, kinds)
    }
    return pd.DataFrame(out, index=df.index[1:])


def panel_from_frame(df: pd.DataFrame) -> TimeSeriesPanel:
    return TimeSeriesPanel(
        values=df.to_numpy(dtype=float),
        series_names=[str(c) for c in df.columns],
        time_labels=[str(i.date()) if hasattr(i, "date") else str(i)
                     for i in df.index],
    )


def _mat(m: np.ndarray) -> list:
    return np.asarray(m).tolist()


def accuracy_report(design, fit) -> dict:
    """Per-series standard deviation, one-step RMSE and adjusted R^2."""
    t, r = design.x.shape
    report = {}
    for i in range(design.k):
        y = design.y[:, i]
        resid = fit.residuals[:, i]
        sst = float(((y - y.mean()) ** 2).sum())
        ssr = float((resid ** 2).sum())
        r2 = 1.0 - ssr / sst if sst > 0 else float("nan")
        adj = 1.0 - (1.0 - r2) * (t - 1) / (t - r)
        report[f"series_{i + 1}"] = {
            "std": float(y.std(ddof=0)),
            "rmse": float(np.sqrt(ssr / t)),
            "adjusted_r2": adj,
        }
    return report


def run_fit(config: RunConfig, panel: TimeSeriesPanel) -> dict:
    """Full pipeline on an in-memory panel; returns the artifact bundle."""
    design = build_design(panel, config.lag)
    fit = ols_fit(design)
    k, r = fit.k, fit.r
    if not config.jtuple:
        raise ConfigError("jtuple is required for identification")
    sel = ColumnSelection(config.jtuple)
    sel.validate_for(k, r)
    chk = check_stationarity(fit.b_hat, k, config.lag)
    if not chk.stationary:
        warnings.warn(
            f"fitted model is not stationary (radius {chk.radius:.4f}); "
            "impulse responses may diverge"
        )
    sf = estimate_structure(fit, sel)
    h_max = config.horizons
    psi = impulse.irf(fit.b_hat, k, config.lag, h_max)
    psi_o = impulse.total_effect_irf(psi, sf.q_hat)
    oirf = impulse.oirf(psi, fit.sigma_hat)
    irf_rows = []
    for h in range(h_max + 1):
        j4 = impulse.jacobian_irf(fit.b_hat, k, config.lag, h)
        j5 = impulse.jacobian_total_effect(fit.b_hat, sel, h)
        sigma4 = j4 @ fit.sigma_b_hat @ j4.T
        sigma5 = j5 @ fit.sigma_b_hat @ j5.T
        lo4, hi4 = impulse.confidence_bands(psi[h], sigma4, config.level,
                                            fit.t_obs)
        lo5, hi5 = impulse.confidence_bands(psi_o[h], sigma5, config.level,
                                            fit.t_obs)
        for i in range(k):
            for j in range(k):
                irf_rows.append({
                    "horizon": h, "response": i + 1, "impulse": j + 1,
                    "irf": psi[h][i, j],
                    "irf_lower": lo4[i, j], "irf_upper": hi4[i, j],
                    "total_effect": psi_o[h][i, j],
                    "total_lower": lo5[i, j], "total_upper": hi5[i, j],
                    "oirf": oirf[h][i, j],
                })
    v = None if config.test_weight is None else config.test_weight
    tests = {}
    for kind in ("z1", "z2", "z3"):
        res = z_statistic(kind, fit, sf, v=v)
        tests[kind] = {"z_value": res.z_value, "p_value": res.p_value,
                       "t_obs": res.t_obs}
    bundle = {
        "t_obs": fit.t_obs,
        "k": k,
        "lag": config.lag,
        "jtuple": list(sel.indices),
        "series_names": panel.series_names,
        "stationarity": {"radius": chk.radius, "stationary": chk.stationary},
        "b_hat": _mat(fit.b_hat),
        "sigma_hat": _mat(fit.sigma_hat),
        "q_hat": _mat(sf.q_hat),
        "a0_hat": _mat(sf.a0_hat),
        "a_hat": _mat(sf.a_hat),
        "u_hat": _mat(sf.u_hat),
        "tests": tests,
        "accuracy": accuracy_report(design, fit),
        "irf": irf_rows,
    }
    return bundle


def _write_bundle(bundle: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    irf_rows = bundle["irf"]
    (out_dir / "bundle.json").write_text(json.dumps(bundle, indent=2))
    for name in ("b_hat", "sigma_hat", "q_hat", "a0_hat", "a_hat", "u_hat"):
        _write_matrix_csv(out_dir / f"{name}.csv", bundle[name])
    cols = list(irf_rows[0]) if irf_rows else []
    lines = [",".join(cols)]
    for row in irf_rows:
        lines.append(",".join(repr(float(row[c])) if isinstance(row[c], float)
                              else str(row[c]) for c in cols))
    (out_dir / "irf.csv").write_text("\n".join(lines) + "\n")


def _write_matrix_csv(path: Path, rows: list) -> None:
    lines = [",".join(repr(float(v)) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _resolve_dgp(config: RunConfig) -> simulation.SvarDgp:
    if config.dgp == "h0":
        return simulation.reference_dgp(False)
    if config.dgp == "h1":
        return simulation.reference_dgp(True)
    if isinstance(config.dgp, dict):
        d = config.dgp
        try:
            return simulation.SvarDgp(
                a0=np.asarray(d["a0"], dtype=float),
                a=np.asarray(d["a"], dtype=float),
                a_w=np.asarray(d["a_w"], dtype=float),
                var_w=float(d.get("var_w", 0.5)),
                var_u=float(d.get("var_u", 0.5)),
                name=d.get("name", "custom"),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid inline dgp: {exc}") from exc
    raise ConfigError(f"unknown dgp {config.dgp!r}")


def _cmd_transform(config: RunConfig, out_dir: Path) -> None:
    df = ingest(config)
    out = transform_panel(df, [s.transform for s in config.series])
    out_dir.mkdir(parents=True, exist_ok=True)
    out.to_csv(out_dir / "transformed.csv", float_format=None,
               index_label="date")
    print(f"wrote {out_dir / 'transformed.csv'} "
          f"({len(out)} rows, {out.shape[1]} series)")


def _fit_bundle(config: RunConfig) -> dict:
    df = ingest(config)
    out = transform_panel(df, [s.transform for s in config.series])
    return run_fit(config, panel_from_frame(out))


def _cmd_fit(config: RunConfig, out_dir: Path) -> None:
    bundle = _fit_bundle(config)
    _write_bundle(bundle, out_dir)
    print(f"wrote artifact bundle to {out_dir} (T={bundle['t_obs']})")


def _cmd_irf(config: RunConfig, out_dir: Path) -> None:
    bundle = _fit_bundle(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_bundle(bundle, out_dir)
    print(f"wrote impulse responses to {out_dir / 'irf.csv'}")


def _cmd_test(config: RunConfig, out_dir: Path) -> None:
    bundle = _fit_bundle(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "tests.json").write_text(json.dumps(bundle["tests"], indent=2))
    for kind, res in bundle["tests"].items():
        print(f"{kind}: z = {res['z_value']:.4f}, "
              f"two-sided p = {res['p_value']:.4f} (T = {res['t_obs']})")


def _cmd_simulate(config: RunConfig, out_dir: Path) -> None:
    dgp = _resolve_dgp(config)
    sel = ColumnSelection(config.jtuple) if config.jtuple \
        else simulation.REFERENCE_SELECTION
    report = simulation.run_replications(
        dgp, config.t_list, config.reps, sel,
        seed=config.seed, burn_in=config.burn_in,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json())
    for t_obs in config.t_list:
        (out_dir / f"draws_T{t_obs}.csv").write_text(report.draws_csv(t_obs))
    print(f"wrote simulation report to {out_dir / 'report.json'}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lusvar",
        description="Structural VAR identification via LU decomposition",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fit", "irf", "test", "simulate", "transform"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON config path")
        cmd.add_argument("--out", default="out", help="output directory")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--lag", type=int, default=None)
        cmd.add_argument("--jtuple", default=None,
                         help="comma-separated 1-based column indices")
        cmd.add_argument("--level", type=float, default=None)
        cmd.add_argument("--horizons", type=int, default=None)
        cmd.add_argument("--reps", type=int, default=None)
    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        config.seed = args.seed
    if args.lag is not None:
        config.lag = args.lag
    if args.jtuple is not None:
        try:
            config.jtuple = tuple(int(v) for v in args.jtuple.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --jtuple {args.jtuple!r}") from exc
    if args.level is not None:
        config.level = args.level
    if args.horizons is not None:
        config.horizons = args.horizons
    if args.reps is not None:
        config.reps = args.reps
    if config.lag < 1:
        raise ConfigError(f"lag must be >= 1, got {config.lag}")
    if not 0.0 < config.level < 1.0:
        raise ConfigError(f"level {config.level} not in (0, 1)")
    return config


_COMMANDS = {
    "fit": _cmd_fit,
    "irf": _cmd_irf,
    "test": _cmd_test,
    "simulate": _cmd_simulate,
    "transform": _cmd_transform,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _apply_overrides(RunConfig.from_file(args.config), args)
        _COMMANDS[args.command](config, Path(args.out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except LuSvarError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
