"""Command-line workflow: phantom generation, degradation, fitting, querying,
metrics, wall shear stress, baselines, and the hyperparameter sweep harness.

Every run writes a JSON manifest beside its primary output carrying the
full argument echo, seeds, resolved inputs, and wall-clock timings.
Re-executing a manifest (``sirenflow rerun``) reproduces the payload
outputs byte for byte; only manifests carry timings.

Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 4 I/O error.
"""

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, io
from .baselines import GridInterpolator, Rbf4dInterpolator
from .degrade import DegradationConfig, NOISE_PRESETS, degrade, preset_config
from .errors import ConfigError, IoError, NumericError, SirenflowError
from .estimators import SirenRegressor, fit_image, refined_grid_coords
from .grid import VelocityImage, scattered_from_image, wall_rows_physical
from .metrics import compare
from .phantoms import GridSpec, TubePhantom, SwirlPhantom, default_grid_for, phantom_from_dict
from .wss import WssConfig, wss_field

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _out_path(args, name):
    p = Path(name)
    if p.is_absolute():
        return p
    return Path(args.out_dir) / p


def _resolve_input(path):
    p = Path(path)
    if not p.exists():
        raise IoError(f"input file not found: {p}")
    return str(p.resolve())


def load_sampler(path):
    """Dispatch a sampler file by extension: .sm1 model, .vf1 grid, .json phantom."""
    path = str(path)
    if path.endswith(".sm1"):
        return io.read_model(path)
    if path.endswith(".vf1"):
        return GridInterpolator(io.read_velocity_image(path))
    if path.endswith(".json"):
        return phantom_from_dict(io.read_json(path))
    raise ConfigError(f"cannot interpret {path} as a sampler (.sm1, .vf1, or .json)")


def _parse_triple(text, cast=float):
    parts = [cast(p) for p in str(text).split(",")]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise ConfigError(f"expected 1 or 3 comma-separated values, got {text!r}")
    return tuple(parts)


def _parse_list(text, cast):
    return [cast(p) for p in str(text).split(",") if p != ""]


def _parse_times(text):
    """t0:dt:t1 (inclusive of t1 up to rounding) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"times must be t0:dt:t1, got {text!r}")
        t0, dt, t1 = (float(p) for p in parts)
        if dt <= 0:
            raise ConfigError("time step must be positive")
        n = int(np.floor((t1 - t0) / dt + 1e-9)) + 1
        return t0 + dt * np.arange(max(n, 1))
    return np.asarray(_parse_list(text, float))


def _write_manifest(args, primary_out, inputs, outputs, seconds, extra=None):
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "subcommand": args.subcommand,
        "version": __version__,
        "config": config,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "outputs": [str(o) for o in outputs],
        "timings": {"seconds": seconds},
    }
    if extra:
        manifest.update(extra)
    path = Path(str(primary_out) + ".manifest.json")
    io.write_report_json(path, manifest)
    return path


def _auto_venc(img, margin):
    vmax = img.max_abs_velocity()
    venc = np.where(vmax > 0, vmax * margin, 1.0)
    return tuple(float(v) for v in venc)


# -- subcommand implementations ------------------------------------------------


def cmd_phantom(args):
    t0 = time.perf_counter()
    if args.kind == "tube":
        phantom = TubePhantom(
            radius=args.radius,
            length=args.length,
            v_max=args.vmax,
            period=args.period,
            offset=args.offset,
            axial_modulation=args.axial_modulation,
        )
    else:
        phantom = SwirlPhantom(
            omega=args.omega, sigma=args.sigma, period=args.period, offset=args.offset
        )
    if args.dims == "auto":
        grid = default_grid_for(phantom, spacing=args.spacing)
    else:
        dims = _parse_triple(args.dims, int)
        spacing = (args.spacing,) * 3
        if args.origin == "auto":
            auto = default_grid_for(phantom, spacing=args.spacing)
            origin = auto.origin
        else:
            origin = _parse_triple(args.origin, float)
        grid = GridSpec(dims=dims, spacing=spacing, origin=origin)
    times = args.t0 + args.dt * np.arange(args.frames)
    img = phantom.image(grid, times)
    img.meta["phantom"] = phantom.to_dict()

    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_velocity_image(out, img)
    outputs = [out, Path(str(out) + ".bin"), Path(str(out) + ".mask.bin")]
    spec_out = _out_path(args, args.phantom_json)
    io.write_report_json(spec_out, phantom.to_dict())
    outputs.append(spec_out)
    if args.kind == "tube" and args.wall:
        wall = phantom.wall_surface(args.wall_circ, args.wall_axial)
        wall_out = _out_path(args, args.wall)
        io.write_wall_surface(wall_out, wall)
        outputs.append(wall_out)
    _write_manifest(args, out, [], outputs, time.perf_counter() - t0)
    print(f"phantom: wrote {out} ({img.dims[0]}x{img.dims[1]}x{img.dims[2]}x{img.dims[3]})")
    return EXIT_OK


def cmd_degrade(args):
    t0 = time.perf_counter()
    in_path = _resolve_input(args.in_)
    img = io.read_velocity_image(in_path)
    if args.cfg:
        cfg_dict = io.read_json(_resolve_input(args.cfg))
        cfg = DegradationConfig.from_dict(cfg_dict)
        if args.seed is not None:
            cfg.seed = args.seed
    else:
        venc = (
            _auto_venc(img, args.venc_margin)
            if args.venc == "auto"
            else _parse_triple(args.venc)
        )
        if args.preset:
            cfg = preset_config(args.preset, venc, h=args.h, seed=args.seed or 0)
        else:
            cfg = DegradationConfig(
                h=args.h,
                snr=float("inf") if args.snr is None else args.snr,
                s_percent=args.s_percent,
                venc=venc,
                seed=args.seed or 0,
            )
    noisy = degrade(img, cfg)
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_velocity_image(out, noisy)
    outputs = [out, Path(str(out) + ".bin")]
    if noisy.mask is not None:
        outputs.append(Path(str(out) + ".mask.bin"))
    _write_manifest(
        args, out, [in_path], outputs, time.perf_counter() - t0, {"degradation": cfg.to_dict()}
    )
    print(f"degrade: wrote {out} (snr={cfg.snr}, s={cfg.s_percent}%, h={cfg.h})")
    return EXIT_OK


def cmd_fit(args):
    t0 = time.perf_counter()
    in_path = _resolve_input(args.in_)
    wall_path = _resolve_input(args.wall)
    img = io.read_velocity_image(in_path)
    wall = io.read_wall_surface(wall_path)
    reg = SirenRegressor(
        depth=args.depth,
        width=args.width,
        omega0=args.omega0,
        seed=args.seed or 0,
        max_iterations=args.max_iter,
        tolerance=args.tol,
        history_size=args.history,
        mean_loss=args.mean_loss,
    )
    reg = fit_image(
        img,
        wall,
        regressor=reg,
        fluid_fraction=args.fluid_fraction,
        wall_count=args.wall_count,
        seed=args.seed or 0,
    )
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_model(out, reg.model_)
    outputs = [out, Path(str(out) + ".bin")]
    if args.trace:
        trace_out = _out_path(args, args.trace)
        io.write_trace_csv(trace_out, reg.history_)
        outputs.append(trace_out)
    res = reg.result_
    _write_manifest(
        args,
        out,
        [in_path, wall_path],
        outputs,
        time.perf_counter() - t0,
        {"fit": {"status": res.status, "iterations": res.iterations, "loss": res.loss}},
    )
    print(
        f"fit: {res.status} after {res.iterations} iterations, "
        f"loss {res.loss:.6g}; wrote {out}"
    )
    return EXIT_OK


def cmd_query(args):
    t0 = time.perf_counter()
    model_path = _resolve_input(args.model)
    model = io.read_model(model_path)
    inputs = [model_path]
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.coords:
        coords_path = _resolve_input(args.coords)
        inputs.append(coords_path)
        coords, _ = io.read_points_csv(coords_path)
        io.write_points_csv(out, coords, model.predict(coords))
        outputs = [out]
    else:
        if not args.like:
            raise ConfigError("query needs --coords or --like")
        like_path = _resolve_input(args.like)
        inputs.append(like_path)
        img = io.read_velocity_image(like_path)
        coords, shape = refined_grid_coords(
            img, args.space_factor, args.time_factor, max_points=args.max_points
        )
        values = model.predict(coords).reshape(*shape, 3)
        refined = VelocityImage(
            data=values,
            spacing=img.spacing / args.space_factor,
            dt=img.dt / args.time_factor,
            origin=img.origin.copy(),
            t_min=img.t_min,
            meta={"refined_from": str(like_path)},
        )
        io.write_velocity_image(out, refined)
        outputs = [out, Path(str(out) + ".bin")]
    _write_manifest(args, out, inputs, outputs, time.perf_counter() - t0)
    print(f"query: wrote {out}")
    return EXIT_OK


def cmd_metrics(args):
    t0 = time.perf_counter()
    ref_path = _resolve_input(args.ref)
    cand_path = _resolve_input(args.cand)
    coords_path = _resolve_input(args.coords)
    coords, _ = io.read_points_csv(coords_path)
    report = compare(load_sampler(ref_path), load_sampler(cand_path), coords)
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_report_json(out, report.to_dict())
    _write_manifest(
        args, out, [ref_path, cand_path, coords_path], [out], time.perf_counter() - t0
    )
    print(
        f"metrics: mNRMSE {report.mnrmse:.3f}% vNRMSE {report.vnrmse:.3f}% "
        f"DE {report.de:.3f}% (K={report.k})"
    )
    return EXIT_OK


def cmd_wss(args):
    t0 = time.perf_counter()
    model_path = _resolve_input(args.model)
    wall_path = _resolve_input(args.wall)
    sampler = load_sampler(model_path)
    wall = io.read_wall_surface(wall_path)
    times = _parse_times(args.times)
    cfg = (
        WssConfig.from_dict(io.read_json(_resolve_input(args.cfg)))
        if args.cfg
        else WssConfig(mu=args.mu, delta_n=args.delta_n)
    )
    field = wss_field(sampler, wall, times, cfg)
    n, m = len(wall), len(times)
    coords = np.column_stack(
        [np.repeat(wall.points, m, axis=0), np.tile(times, n)]
    )
    values = field.values.reshape(n * m, 3)
    mags = field.magnitude().reshape(n * m)
    flags = field.flags.reshape(n * m).astype(float)
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_points_csv(
        out,
        coords,
        np.column_stack([values, mags, flags]),
        value_names=("wss_x", "wss_y", "wss_z", "wss_mag", "flag"),
    )
    _write_manifest(
        args,
        out,
        [model_path, wall_path],
        [out],
        time.perf_counter() - t0,
        {"wss": {"flagged": field.n_flagged(), "config": cfg.to_dict()}},
    )
    print(f"wss: wrote {out} ({field.n_flagged()} flagged probes)")
    return EXIT_OK


def cmd_baseline(args):
    t0 = time.perf_counter()
    in_path = _resolve_input(args.in_)
    coords_path = _resolve_input(args.coords)
    img = io.read_velocity_image(in_path)
    coords, _ = io.read_points_csv(coords_path)
    inputs = [in_path, coords_path]
    if args.method == "litp":
        sampler = GridInterpolator(img)
        values = sampler.predict(coords)
    else:
        X, y = scattered_from_image(img)
        kinds = np.zeros(len(X), dtype=np.uint8)
        if args.wall:
            wall_path = _resolve_input(args.wall)
            inputs.append(wall_path)
            wall = io.read_wall_surface(wall_path)
            wx, wy = wall_rows_physical(wall, img.times)
            X = np.vstack([X, wx])
            y = np.vstack([y, wy])
            kinds = np.concatenate([kinds, np.ones(len(wx), dtype=np.uint8)])
        rbf = Rbf4dInterpolator(
            k_neighbors=args.k,
            c_mq=args.c_mq,
            include_wall_zeros=not args.no_wall_zeros,
            time_scale=args.time_scale,
        )
        rbf.fit(X, y, kinds=kinds)
        values = rbf.predict(coords)
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_points_csv(out, coords, values)
    _write_manifest(args, out, inputs, [out], time.perf_counter() - t0)
    print(f"baseline[{args.method}]: wrote {out}")
    return EXIT_OK


def _sweep_one(task):
    """One (depth, width, noise) cell; runs in a worker process."""
    (clean_path, wall_path, phantom_spec, noise, h, depth, width, seed, factors, fit_args) = task
    img = io.read_velocity_image(clean_path)
    wall = io.read_wall_surface(wall_path)
    venc = _auto_venc(img, 1.1)
    cfg = preset_config(noise, venc, h=h, seed=seed)
    noisy = degrade(img, cfg)

    t0 = time.perf_counter()
    reg = SirenRegressor(
        depth=depth,
        width=width,
        seed=seed,
        max_iterations=fit_args["max_iter"],
        tolerance=fit_args["tol"],
    )
    reg = fit_image(noisy, wall, regressor=reg, seed=seed)
    seconds = time.perf_counter() - t0

    coords, _ = refined_grid_coords(noisy, factors[0], factors[1])
    if phantom_spec is not None:
        reference = phantom_from_dict(phantom_spec)
        keep = reference.contains(coords[:, :3])
    else:
        reference = GridInterpolator(img)
        keep = img.spatial_mask()[
            tuple(
                np.clip(
                    np.rint((coords[:, :3] - img.origin) / img.spacing).astype(int),
                    0,
                    np.asarray(img.dims[:3]) - 1,
                ).T
            )
        ]
    coords = coords[keep]
    report = compare(reference, reg, coords)
    return {
        "depth": depth,
        "width": width,
        "noise": noise,
        "mnrmse": report.mnrmse,
        "vnrmse": report.vnrmse,
        "de": report.de,
        "iterations": reg.result_.iterations,
        "seconds": seconds,
    }


def cmd_sweep(args):
    t0 = time.perf_counter()
    clean_path = _resolve_input(args.in_)
    wall_path = _resolve_input(args.wall)
    phantom_spec = io.read_json(_resolve_input(args.phantom)) if args.phantom else None
    depths = _parse_list(args.depths, int)
    widths = _parse_list(args.widths, int)
    noises = _parse_list(args.noise, str)
    for n in noises:
        if n not in NOISE_PRESETS:
            raise ConfigError(f"unknown noise level {n!r}")
    factors = (args.space_factor, args.time_factor)
    fit_args = {"max_iter": args.max_iter, "tol": args.tol}
    tasks = [
        (clean_path, wall_path, phantom_spec, n, args.h, d, w, args.seed or 0, factors, fit_args)
        for d in depths
        for w in widths
        for n in noises
    ]
    rows, failures = [], []
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            futures = [pool.submit(_sweep_one, t) for t in tasks]
            for task, fut in zip(tasks, futures):
                try:
                    rows.append(fut.result())
                except Exception as exc:  # keep sweeping past individual failures
                    failures.append({"task": task[3:8], "error": str(exc)})
    else:
        for task in tasks:
            try:
                rows.append(_sweep_one(task))
            except SirenflowError as exc:
                failures.append({"task": task[3:8], "error": str(exc)})
    rows.sort(key=lambda r: (r["depth"], r["width"], r["noise"]))

    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["depth,width,noise,mnrmse,vnrmse,de,iterations,seconds"]
    for r in rows:
        lines.append(
            "%d,%d,%s,%.17g,%.17g,%.17g,%d,%.3f"
            % (
                r["depth"],
                r["width"],
                r["noise"],
                r["mnrmse"],
                r["vnrmse"],
                r["de"],
                r["iterations"],
                r["seconds"],
            )
        )
    out.write_text("\n".join(lines) + "\n")

    selection = _select_configuration(rows)
    _write_manifest(
        args,
        out,
        [clean_path, wall_path],
        [out],
        time.perf_counter() - t0,
        {
            "selection_rule": "argmin over (depth, width) of the sum of "
            "mNRMSE + vNRMSE + DE across noise levels",
            "selected": selection,
            "failures": failures,
        },
    )
    if selection:
        print(
            f"sweep: wrote {out}; selected depth={selection['depth']} "
            f"width={selection['width']} (score {selection['score']:.4f})"
        )
    else:
        print(f"sweep: wrote {out}; no complete configuration")
    return EXIT_OK


def _select_configuration(rows):
    """Sum the three metrics across noise levels per (depth, width), pick the min."""
    scores = {}
    counts = {}
    for r in rows:
        key = (r["depth"], r["width"])
        scores[key] = scores.get(key, 0.0) + r["mnrmse"] + r["vnrmse"] + r["de"]
        counts[key] = counts.get(key, 0) + 1
    n_noise = max(counts.values(), default=0)
    complete = {k: v for k, v in scores.items() if counts[k] == n_noise}
    if not complete:
        return None
    best = min(complete, key=complete.get)
    return {"depth": best[0], "width": best[1], "score": complete[best]}


def cmd_rerun(args):
    manifest_path = _resolve_input(args.manifest)
    manifest = io.read_json(manifest_path)
    config = dict(manifest["config"])
    sub = manifest["subcommand"]
    if sub == "rerun":
        raise ConfigError("cannot rerun a rerun manifest")
    if args.out_dir is not None:
        config["out_dir"] = args.out_dir
    ns = argparse.Namespace(**config)
    return _DISPATCH[sub](ns)


# -- argument parsing ----------------------------------------------------------


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="master RNG seed")
    p.add_argument("--threads", type=int, default=1, help="worker pool size (sweep)")
    p.add_argument("--out-dir", default=".", help="directory for relative outputs")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sirenflow",
        description="Continuous space-time velocity fields from noisy voxel "
        "measurements via sinusoidal coordinate networks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("phantom", help="generate an analytic test field")
    p.add_argument("--kind", choices=["tube", "swirl"], required=True)
    p.add_argument("--out", default="clean.vf1")
    p.add_argument("--wall", default="wall.csv", help="wall CSV output (tube only)")
    p.add_argument("--phantom-json", default="phantom.json", help="analytic spec output")
    p.add_argument("--dims", default="auto", help='"nr,nc,ns" or auto')
    p.add_argument("--origin", default="auto", help='"x,y,z" mm or auto')
    p.add_argument("--spacing", type=float, default=1.0, help="isotropic voxel size, mm")
    p.add_argument("--frames", type=int, default=20)
    p.add_argument("--dt", type=float, default=0.01, help="frame spacing, s")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=8.0, help="tube radius, mm")
    p.add_argument("--length", type=float, default=32.0, help="tube length, mm")
    p.add_argument("--vmax", type=float, default=1.0, help="peak centerline speed, m/s")
    p.add_argument("--period", type=float, default=0.2, help="waveform period, s")
    p.add_argument("--offset", type=float, default=0.2, help="waveform floor fraction")
    p.add_argument("--axial-modulation", type=float, default=0.0)
    p.add_argument("--omega", type=float, default=0.12, help="swirl angular scale")
    p.add_argument("--sigma", type=float, default=6.0, help="swirl envelope width, mm")
    p.add_argument("--wall-circ", type=int, default=64)
    p.add_argument("--wall-axial", type=int, default=33)
    _add_common(p)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("degrade", help="synthesize a noisy low-resolution measurement")
    p.add_argument("--in", dest="in_", required=True)
    p.add_argument("--out", default="noisy.vf1")
    p.add_argument("--cfg", default=None, help="JSON degradation config")
    p.add_argument("--preset", choices=sorted(NOISE_PRESETS), default=None)
    p.add_argument("--h", type=int, default=1, help="temporal pooling factor")
    p.add_argument("--snr", type=float, default=None, help="target SNR (default: none)")
    p.add_argument("--s-percent", type=float, default=100.0)
    p.add_argument("--venc", default="auto", help='"a,b,c" m/s or auto')
    p.add_argument("--venc-margin", type=float, default=1.1)
    _add_common(p)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("fit", help="train a network on a measured image")
    p.add_argument("--in", dest="in_", required=True)
    p.add_argument("--wall", required=True)
    p.add_argument("--out", default="model.sm1")
    p.add_argument("--trace", default=None, help="optimizer trace CSV")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--omega0", type=float, default=30.0)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--history", type=int, default=10)
    p.add_argument("--fluid-fraction", type=float, default=1.0)
    p.add_argument("--wall-count", type=int, default=None)
    p.add_argument("--mean-loss", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("query", help="evaluate a checkpoint at coordinates")
    p.add_argument("--model", required=True)
    p.add_argument("--coords", default=None, help="points CSV (x,y,z,t)")
    p.add_argument("--like", default=None, help="VF1 image defining the refined grid")
    p.add_argument("--space-factor", type=int, default=20)
    p.add_argument("--time-factor", type=int, default=10)
    p.add_argument("--max-points", type=float, default=5e7)
    p.add_argument("--out", default="pred.csv")
    _add_common(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("metrics", help="compare two fields at shared points")
    p.add_argument("--ref", required=True, help=".vf1, .sm1, or phantom .json")
    p.add_argument("--cand", required=True)
    p.add_argument("--coords", required=True)
    p.add_argument("--out", default="report.json")
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("wss", help="wall shear stress along a wall surface")
    p.add_argument("--model", required=True, help=".sm1, .vf1, or phantom .json")
    p.add_argument("--wall", required=True)
    p.add_argument("--times", required=True, help="t0:dt:t1 or comma list, s")
    p.add_argument("--cfg", default=None, help="JSON with mu / delta_n_mm")
    p.add_argument("--mu", type=float, default=0.004)
    p.add_argument("--delta-n", type=float, default=0.5)
    p.add_argument("--out", default="wss.csv")
    _add_common(p)
    p.set_defaults(func=cmd_wss)

    p = sub.add_parser("baseline", help="reference interpolation methods")
    p.add_argument("--method", choices=["litp", "rbf4d"], required=True)
    p.add_argument("--in", dest="in_", required=True)
    p.add_argument("--coords", required=True)
    p.add_argument("--out", default="pred.csv")
    p.add_argument("--wall", default=None, help="wall CSV for soft no-slip rows")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--c-mq", type=float, default=None)
    p.add_argument("--time-scale", type=float, default=None)
    p.add_argument("--no-wall-zeros", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("sweep", help="depth x width x noise grid search")
    p.add_argument("--in", dest="in_", required=True, help="clean VF1 image")
    p.add_argument("--wall", required=True)
    p.add_argument("--phantom", default=None, help="analytic reference JSON")
    p.add_argument("--depths", default="4,8")
    p.add_argument("--widths", default="64,128")
    p.add_argument("--noise", default="mild,medium,extreme")
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--space-factor", type=int, default=2)
    p.add_argument("--time-factor", type=int, default=4)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default="sweep.csv")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rerun", help="re-execute a run from its manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", default=None, help="redirect relative outputs")
    p.set_defaults(func=cmd_rerun)

    return parser


_DISPATCH = {
    "phantom": cmd_phantom,
    "degrade": cmd_degrade,
    "fit": cmd_fit,
    "query": cmd_query,
    "metrics": cmd_metrics,
    "wss": cmd_wss,
    "baseline": cmd_baseline,
    "sweep": cmd_sweep,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (IoError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
