"""Command-line front end.

Subcommands: ``design``, ``simulate``, ``compare``, ``pi-pulse``, ``sweep``.
Runs are described by a JSON config document (``--config``) whose fields can
all be overridden by flags; bundled fixture systems are addressable by short
name (hf3, two, multi12).

Exit codes: 0 ok, 2 config error, 3 numeric failure (fixed-point
non-convergence or integrator breakdown), 4 invariant violation (norm
drift beyond tolerance).

Outputs are deterministic: identical configs produce byte-identical files
(fixed summation orders, no wall-clock anywhere; the optional ``#`` metadata
line carries only the version, the time-unit constant and a config digest,
and is suppressed entirely by ``--no-meta``).
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys as _sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, analysis, dynamics, optimizer, pulse, qsystem
from .errors import (ConfigError, DivergenceError, IntegrationError, RabichirpError,
                     SystemLoadError)
from .fixtures import BUNDLED, fixture_path
from .units import AU_TIME_S, NS_PER_AU, ns_to_au

CARRIER_MODES = ("resonant", "first_order", "recurrent", "fixed")


@dataclass
class RunConfig:
    system: Path
    alpha: int
    beta: int
    shape: str
    envelope_file: Optional[Path]
    f0_au: Optional[float]
    sigma_target: Optional[float]       # sigma^2 of the strongest perturber
    sigma_tot_target: Optional[float]   # sigma_tot^2 over all perturbers
    duration_au: float
    carrier: str
    fixed_omega_au: Optional[float]
    initial: Optional[int]
    rtol: float
    atol: float
    max_step_fraction: float
    samples: int
    chirp_samples: int
    fixed_point_tol: float
    fixed_point_max_iter: int
    leakage_budget: Optional[float]
    pi_target: float


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=_sys.stderr)
    return code


def _resolve_system_path(name: str) -> Path:
    if name in BUNDLED:
        return fixture_path(name)
    p = Path(name)
    if not p.exists():
        raise ConfigError(f"system file {name!r} not found (bundled names: {BUNDLED})")
    return p


def _load_config(args) -> RunConfig:
    doc: dict = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    pulse_doc = doc.get("pulse", {})
    integ = doc.get("integrator", {})

    def pick(flag, key, default=None, table=None):
        v = getattr(args, flag, None)
        if v is not None:
            return v
        return (table if table is not None else doc).get(key, default)

    system = pick("system", "system")
    if system is None:
        raise ConfigError("no system given (flag --system or config key 'system')")

    f0 = pick("f0_au", "f0_au", table=pulse_doc)
    sig = pick("sigma_target", "sigma_target", table=pulse_doc)
    sig_tot = pick("sigma_tot_target", "sigma_tot_target", table=pulse_doc)
    given = [x for x in (f0, sig, sig_tot) if x is not None]
    if len(given) != 1:
        raise ConfigError("exactly one of f0_au / sigma_target / sigma_tot_target is required")

    dur_au = pick("duration_au", "duration_au", table=pulse_doc)
    dur_ns = pick("duration_ns", "duration_ns", table=pulse_doc)
    if (dur_au is None) == (dur_ns is None):
        raise ConfigError("exactly one of duration_au / duration_ns is required")
    duration = float(dur_au) if dur_au is not None else ns_to_au(float(dur_ns))
    if duration <= 0:
        raise ConfigError("duration must be positive")

    carrier = pick("carrier", "carrier", "resonant", table=pulse_doc)
    if carrier not in CARRIER_MODES:
        raise ConfigError(f"carrier must be one of {CARRIER_MODES}, got {carrier!r}")
    fixed_w = pick("fixed_omega_au", "fixed_omega_au", table=pulse_doc)
    if carrier == "fixed" and fixed_w is None:
        raise ConfigError("carrier 'fixed' needs fixed_omega_au")

    shape = pick("shape", "shape", "square", table=pulse_doc)
    if shape not in pulse.SHAPES:
        raise ConfigError(f"shape must be one of {pulse.SHAPES}, got {shape!r}")
    env_file = pick("envelope_file", "envelope_file", table=pulse_doc)
    if shape == "tabulated" and env_file is None:
        raise ConfigError("shape 'tabulated' needs envelope_file")

    budget = pick("leakage_budget", "leakage_budget")
    if budget is not None and not 0.0 < float(budget) < 1.0:
        raise ConfigError(f"leakage_budget must lie in (0, 1), got {budget}")

    return RunConfig(
        system=_resolve_system_path(str(system)),
        alpha=int(pick("alpha", "alpha", 0)),
        beta=int(pick("beta", "beta", 1)),
        shape=shape,
        envelope_file=Path(env_file) if env_file else None,
        f0_au=None if f0 is None else float(f0),
        sigma_target=None if sig is None else float(sig),
        sigma_tot_target=None if sig_tot is None else float(sig_tot),
        duration_au=duration,
        carrier=carrier,
        fixed_omega_au=None if fixed_w is None else float(fixed_w),
        initial=pick("initial", "initial"),
        rtol=float(pick("rtol", "rtol", 1e-10, table=integ)),
        atol=float(pick("atol", "atol", 1e-12, table=integ)),
        max_step_fraction=float(pick("max_step_fraction", "max_step_fraction", 0.05, table=integ)),
        samples=int(pick("samples", "samples", 2000, table=integ)),
        chirp_samples=int(pick("chirp_samples", "chirp_samples", optimizer.DEFAULT_GRID)),
        fixed_point_tol=float(pick("fixed_point_tol", "fixed_point_tol", optimizer.DEFAULT_TOL)),
        fixed_point_max_iter=int(pick("fixed_point_max_iter", "fixed_point_max_iter",
                                      optimizer.DEFAULT_MAX_ITER)),
        leakage_budget=None if budget is None else float(budget),
        pi_target=float(pick("pi_target", "pi_target", math.pi)),
    )


def _resolve_f0(cfg: RunConfig, sys_: qsystem.LevelSystem, pair: qsystem.TransitionPair) -> float:
    """Resolve the drive amplitude from whichever target the config gives.

    sigma_target fixes sigma^2 of the strongest perturber (largest |sigma|,
    ties broken by lowest level id); sigma_tot_target fixes the sum. Both
    invert exactly because every sigma scales linearly with F0.
    """
    if cfg.f0_au is not None:
        return cfg.f0_au
    ref = optimizer.perturber_strengths(sys_, pair, 1.0)  # sigma per unit F0
    if not ref:
        raise ConfigError("system has no perturbing levels; give f0_au directly")
    if cfg.sigma_target is not None:
        lead = max(ref, key=lambda s: (abs(s.sigma), -s.level))
        return math.sqrt(cfg.sigma_target) / abs(lead.sigma)
    k = sum(s.sigma ** 2 for s in ref)
    return math.sqrt(cfg.sigma_tot_target / k)


def _build_envelope_args(cfg: RunConfig):
    if cfg.shape != "tabulated":
        return {}
    env = pulse.load_envelope_csv(cfg.envelope_file)
    return {"table_t": env.table_t, "table_m": env.table_m}


def _design_pulse(cfg: RunConfig, sys_, pair, f0: float) -> pulse.PulseSpec:
    """Pulse with the carrier the config asked for."""
    w_ab = qsystem.transition_sign_and_freq(sys_, pair.alpha, pair.beta)[1]
    bare = pulse.make_pulse(f0, cfg.shape, cfg.duration_au, **_build_envelope_args(cfg))
    if cfg.carrier == "resonant" or cfg.carrier == "fixed":
        w = w_ab if cfg.carrier == "resonant" else cfg.fixed_omega_au
        carrier = pulse.FixedCarrier(w)
    elif cfg.carrier == "first_order":
        carrier = pulse.ChirpedCarrier(optimizer.first_order_chirp(
            sys_, pair, bare, n_samples=cfg.chirp_samples))
    else:
        prof = optimizer.recurrent_chirp(
            sys_, pair, bare, n_samples=cfg.chirp_samples,
            tol=cfg.fixed_point_tol, max_iter=cfg.fixed_point_max_iter)
        if not prof.converged:
            raise DivergenceError(
                f"fixed-point chirp did not converge in {cfg.fixed_point_max_iter} "
                f"iterations (tol {cfg.fixed_point_tol})")
        carrier = pulse.ChirpedCarrier(prof)
    return pulse.make_pulse(f0, cfg.shape, cfg.duration_au, carrier=carrier,
                            **_build_envelope_args(cfg))


def _meta_line(cfg_digest: str) -> str:
    return (f"rabichirp v{__version__} au_time_s={AU_TIME_S:.13e} config_sha={cfg_digest}")


def _config_digest(cfg: RunConfig) -> str:
    blob = json.dumps({k: str(v) for k, v in vars(cfg).items()}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _write_text(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    else:
        _sys.stdout.write(text)


def _simulate_once(cfg: RunConfig):
    sys_ = qsystem.load_system_file(cfg.system)
    pair = qsystem.TransitionPair(cfg.alpha, cfg.beta)
    f0 = _resolve_f0(cfg, sys_, pair)
    spec = _design_pulse(cfg, sys_, pair, f0)
    opts = dynamics.IntegratorOptions(rtol=cfg.rtol, atol=cfg.atol,
                                      max_step_fraction=cfg.max_step_fraction,
                                      n_report=cfg.samples)
    traj = dynamics.integrate(sys_, pair, spec, initial=cfg.initial, opts=opts)
    strengths = optimizer.perturber_strengths(sys_, pair, f0)
    metrics = analysis.transfer_metrics(traj, pair, [s.level for s in strengths])
    return sys_, pair, f0, spec, traj, strengths, metrics


# --- subcommands ----------------------------------------------------------

def cmd_design(args) -> int:
    cfg = _load_config(args)
    sys_ = qsystem.load_system_file(cfg.system)
    pair = qsystem.TransitionPair(cfg.alpha, cfg.beta)
    qsystem.validate_pair(sys_, pair)
    f0 = _resolve_f0(cfg, sys_, pair)
    report = optimizer.design_report(sys_, pair, f0, cfg.shape,
                                     leakage_budget=cfg.leakage_budget,
                                     pi_target=cfg.pi_target)
    doc = report.to_json_dict()
    doc["system"] = str(cfg.system)
    doc["alpha"], doc["beta"] = pair.alpha, pair.beta
    if not args.no_meta:
        doc["meta"] = _meta_line(_config_digest(cfg))
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    _write_text(args.out, text)
    if args.out:
        _sys.stdout.write(text)
    if args.chirp_out:
        spec = _design_pulse(cfg, sys_, pair, f0)
        if isinstance(spec.carrier, pulse.ChirpedCarrier):
            buf = io.StringIO()
            spec.carrier.profile.to_csv(buf)
            _write_text(args.chirp_out, buf.getvalue())
        else:
            raise ConfigError("--chirp-out needs carrier first_order or recurrent")
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    sys_, pair, f0, spec, traj, strengths, metrics = _simulate_once(cfg)
    buf = io.StringIO()
    meta = None if args.no_meta else _meta_line(_config_digest(cfg))
    dynamics.trajectory_to_csv(traj, buf, amplitudes=args.amplitudes, meta=meta)
    _write_text(args.out, buf.getvalue())
    mdoc = metrics.to_json_dict()
    mdoc["f0_au"] = f0
    mdoc["norm_drift"] = traj.norm_drift
    mdoc["steps"] = traj.stats.steps
    text = json.dumps(mdoc, indent=2, sort_keys=True) + "\n"
    if args.metrics_out:
        _write_text(args.metrics_out, text)
    if not args.out:
        pass  # trajectory already went to stdout
    elif not args.metrics_out:
        _sys.stdout.write(text)
    if args.chirp_out:
        if not isinstance(spec.carrier, pulse.ChirpedCarrier):
            raise ConfigError("--chirp-out needs carrier first_order or recurrent")
        cbuf = io.StringIO()
        spec.carrier.profile.to_csv(cbuf)
        _write_text(args.chirp_out, cbuf.getvalue())
    if traj.stats.norm_flagged:
        print(f"error: norm drift {traj.norm_drift:.3e} exceeds tolerance", file=_sys.stderr)
        return 4
    return 0


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    if cfg.carrier in ("resonant", "fixed"):
        raise ConfigError("compare needs an optimized carrier (first_order or recurrent)")
    sys_ = qsystem.load_system_file(cfg.system)
    pair = qsystem.TransitionPair(cfg.alpha, cfg.beta)
    f0 = _resolve_f0(cfg, sys_, pair)
    opts = dynamics.IntegratorOptions(rtol=cfg.rtol, atol=cfg.atol,
                                      max_step_fraction=cfg.max_step_fraction,
                                      n_report=cfg.samples)
    w_ab = qsystem.transition_sign_and_freq(sys_, pair.alpha, pair.beta)[1]
    spec_opt = _design_pulse(cfg, sys_, pair, f0)
    spec_res = pulse.make_pulse(f0, cfg.shape, cfg.duration_au,
                                carrier=pulse.FixedCarrier(w_ab),
                                **_build_envelope_args(cfg))
    traj_res = dynamics.integrate(sys_, pair, spec_res, initial=cfg.initial, opts=opts)
    traj_opt = dynamics.integrate(sys_, pair, spec_opt, initial=cfg.initial, opts=opts)
    strengths = optimizer.perturber_strengths(sys_, pair, f0)
    report = analysis.compare_runs(traj_res, traj_opt, pair, [s.level for s in strengths])
    doc = report.to_json_dict()
    doc["f0_au"] = f0
    if not args.no_meta:
        doc["meta"] = _meta_line(_config_digest(cfg))
    _write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if args.series_out:
        buf = io.StringIO()
        report.to_csv(buf)
        _write_text(args.series_out, buf.getvalue())
    if traj_res.stats.norm_flagged or traj_opt.stats.norm_flagged:
        return 4
    return 0


def cmd_pi_pulse(args) -> int:
    cfg = _load_config(args)
    sys_ = qsystem.load_system_file(cfg.system)
    pair = qsystem.TransitionPair(cfg.alpha, cfg.beta)
    qsystem.validate_pair(sys_, pair)
    f0 = _resolve_f0(cfg, sys_, pair)
    mu_ab = abs(sys_.mu(pair.alpha, pair.beta))
    doc = {"f0_au": f0, "mu_ab_au": mu_ab, "target_angle": cfg.pi_target, "durations": {}}
    for shape in ("square", "sine", "sine_squared"):
        d = pulse.pi_pulse_duration(f0, mu_ab, shape, target=cfg.pi_target)
        doc["durations"][shape] = {"duration_au": d, "duration_ns": d * NS_PER_AU}
    if not args.no_meta:
        doc["meta"] = _meta_line(_config_digest(cfg))
    _write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def _sweep_point(payload):
    cfg_vars, param, value, hold_area, f0_ref = payload
    cfg = RunConfig(**cfg_vars)
    if param == "f0_au":
        cfg.f0_au, cfg.sigma_target, cfg.sigma_tot_target = float(value), None, None
        if hold_area:
            # keep the integrated pulse area fixed: stronger drive, shorter
            # pulse (the drive-intensity / transfer-quality trade-off)
            cfg.duration_au *= f0_ref / float(value)
    elif param == "duration_au":
        cfg.duration_au = float(value)
    elif param == "duration_ns":
        cfg.duration_au = ns_to_au(float(value))
    elif param == "shape":
        cfg.shape = str(value)
    else:
        raise ConfigError(f"unknown sweep parameter {param!r}")
    _, _, f0, spec, traj, strengths, metrics = _simulate_once(cfg)
    rows = [
        ("f0_au", f0),
        ("duration_au", cfg.duration_au),
        ("max_transfer", metrics.max_transfer),
        ("min_retained", metrics.min_retained),
        ("oscillation_count", metrics.oscillation_count),
        ("norm_drift", traj.norm_drift),
    ]
    return value, cfg.shape, rows, traj.stats.norm_flagged


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    param = args.param
    try:
        if param == "shape":
            values = [v.strip() for v in args.values.split(",")]
        else:
            values = [float(v) for v in args.values.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad sweep values {args.values!r}: {exc}") from exc
    if not values:
        raise ConfigError("empty sweep")

    f0_ref = cfg.f0_au
    if args.hold_area and param == "f0_au":
        sys_ = qsystem.load_system_file(cfg.system)
        f0_ref = _resolve_f0(cfg, sys_, qsystem.TransitionPair(cfg.alpha, cfg.beta))
    payloads = [(vars(cfg), param, v, bool(args.hold_area), f0_ref) for v in values]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, payloads))
    else:
        results = [_sweep_point(p) for p in payloads]

    # deterministic emission order regardless of execution order
    order = np.argsort([p[2] for p in payloads], kind="stable") if param != "shape" \
        else np.arange(len(values))
    lines = ["axis,axis_value,shape,metric,value"]
    flagged = False
    for k in order:
        value, shape, rows, flag = results[k]
        flagged = flagged or flag
        for name, v in rows:
            val = f"{v:.17g}" if isinstance(v, float) else str(v)
            vtxt = f"{value:.17g}" if isinstance(value, float) else str(value)
            lines.append(f"{param},{vtxt},{shape},{name},{val}")
    text = "\n".join(lines) + "\n"
    if not args.no_meta:
        text = f"# {_meta_line(_config_digest(cfg))}\n" + text
    _write_text(args.out, text)
    return 4 if flagged else 0


# --- argument parsing -----------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--system", help=f"system file or bundled name {BUNDLED}")
    p.add_argument("--alpha", type=int, help="selected level alpha (default 0)")
    p.add_argument("--beta", type=int, help="selected level beta (default 1)")
    p.add_argument("--shape", help="square | sine | sine_squared | tabulated")
    p.add_argument("--envelope-file", dest="envelope_file", help="CSV for shape=tabulated")
    p.add_argument("--f0-au", dest="f0_au", type=float, help="drive amplitude, a.u.")
    p.add_argument("--sigma-target", dest="sigma_target", type=float,
                   help="target sigma^2 of the strongest perturber")
    p.add_argument("--sigma-tot-target", dest="sigma_tot_target", type=float,
                   help="target sigma_tot^2 summed over perturbers")
    p.add_argument("--duration-au", dest="duration_au", type=float)
    p.add_argument("--duration-ns", dest="duration_ns", type=float)
    p.add_argument("--carrier", choices=CARRIER_MODES)
    p.add_argument("--fixed-omega-au", dest="fixed_omega_au", type=float)
    p.add_argument("--initial", type=int, help="initially populated level (default beta)")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--max-step-fraction", dest="max_step_fraction", type=float)
    p.add_argument("--samples", type=int, help="report grid size (default 2000)")
    p.add_argument("--chirp-samples", dest="chirp_samples", type=int)
    p.add_argument("--fixed-point-tol", dest="fixed_point_tol", type=float)
    p.add_argument("--fixed-point-max-iter", dest="fixed_point_max_iter", type=int)
    p.add_argument("--leakage-budget", dest="leakage_budget", type=float)
    p.add_argument("--pi-target", dest="pi_target", type=float)
    p.add_argument("--no-meta", action="store_true", help="omit the metadata line")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rabichirp",
        description="Design chirped driving pulses for Rabi-like population transfer "
                    "and verify them by direct Schrodinger-equation integration.")
    ap.add_argument("--version", action="version", version=f"rabichirp {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="closed-form design report (JSON)")
    _add_common(p)
    p.add_argument("--chirp-out", dest="chirp_out", help="also write the chirp CSV here")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="integrate one run; trajectory CSV + metrics JSON")
    _add_common(p)
    p.add_argument("--metrics-out", dest="metrics_out")
    p.add_argument("--chirp-out", dest="chirp_out")
    p.add_argument("--amplitudes", action="store_true",
                   help="append re/im amplitude columns to the CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="resonant vs optimized run, same pulse")
    _add_common(p)
    p.add_argument("--series-out", dest="series_out", help="long-format CSV for plotting")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pi-pulse", help="pulse durations solving the area condition")
    _add_common(p)
    p.set_defaults(func=cmd_pi_pulse)

    p = sub.add_parser("sweep", help="metric grid over f0 / duration / shape")
    _add_common(p)
    p.add_argument("--param", required=True,
                   choices=("f0_au", "duration_au", "duration_ns", "shape"))
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    p.add_argument("--hold-area", dest="hold_area", action="store_true",
                   help="on an f0_au sweep, rescale the duration per point so the "
                        "integrated pulse area stays fixed")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(2, str(exc))
    except (SystemLoadError, ValueError) as exc:
        return _fail(2, str(exc))
    except (DivergenceError, IntegrationError) as exc:
        return _fail(3, str(exc))
    except RabichirpError as exc:  # remaining library errors are config-ish
        return _fail(2, str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
