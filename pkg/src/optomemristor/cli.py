"""``optomem`` command-line front end.

Every experiment writes its CSV artifacts plus a ``manifest.json`` into
``<out>/<experiment>/``.  ``--out`` defaults to ``$OPTOMEM_OUTPUT_DIR`` and
then to ``./optomem-output``.  Exit status: 0 ok, 2 config error, 1
experiment failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from scipy import stats

from . import config as C
from . import io
from .device import latency_mean, sample_latency, sweep_trace, zero_crossing
from .maze import (
    End,
    agent_and_device_rngs,
    device_synapse_array,
    greedy_path,
    train,
)
from .optics import (
    MaterialTable,
    absorption_spectrum,
    design_thickness,
    peak_absorption,
    scan_thickness,
)
from .xor import run_xor, threshold_plane_data

log = logging.getLogger("optomem")

OUTPUT_ENV = "OPTOMEM_OUTPUT_DIR"
SUCCESS_WINDOW = 10


# -- helpers -----------------------------------------------------------------

def parse_seed_range(text: str) -> list[int]:
    """``"a..b"`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = (int(x) for x in text.split(".."))
        else:
            a = b = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None
    if a > b or a < 0:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}")
    return list(range(a, b + 1))


def check_seed(seed: int) -> int:
    if not 0 <= seed < 2**64:
        raise C.ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def config_echo(cfg) -> dict:
    return {s: dict(cfg[s]) for s in cfg.sections()}


def apply_overrides(cfg, args) -> None:
    """Copy command-line flags into the config so the manifest echoes them."""
    for item in args.set or ():
        try:
            key, value = item.split("=", 1)
            section, option = key.rsplit(".", 1)
        except ValueError:
            raise C.ConfigError(f"--set expects section.key=value, got {item!r}") from None
        if not cfg.has_section(section):
            raise C.ConfigError(f"--set: unknown section [{section}]")
        cfg.set(section, option, value)
    flag_map = {
        "iv-sweep": {"profile": "profile", "power": "power"},
        "latency-stats": {"profile": "profile", "samples": "n_samples"},
        "cavity-design": {"target": "target_nm"},
        "maze-train": {"trials": "n_trials"},
        "xor": {"profile": "profile", "inhib_power": "inhib_power"},
    }
    section = {"iv-sweep": "iv_sweep", "latency-stats": "latency_stats", "cavity-design": "optics",
               "maze-train": "maze", "xor": "dendrite"}.get(args.command)
    for attr, key in flag_map.get(args.command, {}).items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg.set(section, key, str(value))
    if args.command == "maze-train" and getattr(args, "profile", None) is not None:
        cfg.set("synapse", "profile", args.profile)
    seed = getattr(args, "seed", None)
    if seed is not None:
        cfg.set("run", "seed", str(seed))


# -- experiments -------------------------------------------------------------
# Each returns (artifact paths, results dict).

def exp_iv_sweep(cfg, seed: int, out: Path):
    s = "iv_sweep"
    params = C.device_params(cfg, cfg.get(s, "profile").strip())
    grid = dict(v_start=C.get_float(cfg, s, "v_start"), v_stop=C.get_float(cfg, s, "v_stop"),
                v_step=C.get_float(cfg, s, "v_step"))
    dwell = C.get_float(cfg, s, "dwell")
    round_trip = cfg.getboolean(s, "round_trip")
    power = C.get_float(cfg, s, "power")
    dark_rng, lit_rng = (np.random.default_rng(ss) for ss in np.random.SeedSequence(seed).spawn(2))
    dark = sweep_trace(params, **grid, optical_power=0.0, rng=dark_rng, dwell=dwell,
                       round_trip=round_trip)
    lit = sweep_trace(params, **grid, optical_power=power, rng=lit_rng, dwell=dwell,
                      round_trip=round_trip)
    paths = [io.write_trace(out / "iv_dark.csv", dark.rows),
             io.write_trace(out / "iv_sweep.csv", lit.rows)]

    def first_set(trace):
        for r in trace.rows:
            if "Set" in r.event.split(";"):
                return r.voltage_V
        return None

    v0 = zero_crossing([(r.voltage_V, r.current_A) for r in lit.rows])
    results = {"optical_power_W": power, "zero_crossing_V": v0,
               "set_voltage_dark_V": first_set(dark), "set_voltage_lit_V": first_set(lit)}
    return paths, results


def exp_latency_stats(cfg, seed: int, out: Path):
    s = "latency_stats"
    params = C.device_params(cfg, cfg.get(s, "profile").strip())
    n = cfg.getint(s, "n_samples")
    if n < 2:
        raise C.ConfigError("[latency_stats] n_samples must be >= 2")
    rng = np.random.default_rng(seed)
    rows, hist_rows = [], []
    for dv in C.get_floats(cfg, s, "delta_v"):
        tau = latency_mean(params, dv)
        x = np.array([sample_latency(params, dv, rng) for _ in range(n)])
        ks = stats.kstest(x, "expon", args=(0, tau))
        rows.append((dv, n, float(x.mean()), tau, float(x.mean() / tau - 1),
                     float(ks.statistic), float(ks.pvalue)))
        counts, edges = np.histogram(x, bins=50, range=(0.0, 5 * tau))
        hist_rows += [(dv, float(lo), float(hi), int(c))
                      for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    paths = [
        io.write_csv(out / "latency_stats.csv", ("delta_v_V", "n_samples", "mean_s", "expected_mean_s",
                                                 "rel_error", "ks_statistic", "ks_pvalue"), rows),
        io.write_csv(out / "latency_hist.csv", ("delta_v_V", "bin_lo_s", "bin_hi_s", "count"), hist_rows),
    ]
    means = [r[2] for r in rows]
    results = {"means_s": means, "ks_pvalues": [r[6] for r in rows],
               "mean_decreasing": bool(all(a > b for a, b in zip(means, means[1:])))}
    return paths, results


def exp_cavity_design(cfg, seed: int, out: Path):
    s = "optics"
    materials = MaterialTable.bundled()
    stack = C.optics_stack(cfg)
    cavity = cfg.get(s, "cavity_material").strip()
    grid = dict(lambda_min=C.get_float(cfg, s, "lambda_min"), lambda_max=C.get_float(cfg, s, "lambda_max"),
                n_points=cfg.getint(s, "n_points"))
    d_min, d_max = C.get_float(cfg, s, "d_min"), C.get_float(cfg, s, "d_max")
    target = C.get_float(cfg, s, "target_nm")
    try:
        scan = scan_thickness(stack, d_min, d_max, materials, cavity, **grid)
        d, a_peak = design_thickness(stack, target, d_min, d_max, materials, cavity, **grid)
        designed = stack.with_thickness(stack.layer_index(cavity), d)
        spectrum = absorption_spectrum(designed, grid["lambda_min"], grid["lambda_max"], grid["n_points"],
                                   materials)
    except KeyError as exc:  # unknown material in the stack description
        raise C.ConfigError(str(exc)) from exc
    lam_peak, _ = peak_absorption(spectrum)
    paths = [
        io.write_csv(out / "spectrum.csv", ("wavelength_nm", "R", "T", "A"), spectrum.rows()),
        io.write_csv(out / "thickness_scan.csv", ("d_nm", "peak_wavelength_nm", "peak_absorption"),
                     zip(scan.thickness.tolist(), scan.peak_wavelength.tolist(),
                         scan.peak_absorption.tolist())),
    ]
    results = {"target_nm": target, "d_nm": d, "A_peak": a_peak, "peak_wavelength_nm": lam_peak}
    return paths, results


def _train_one(cfg_text: str, seed: int):
    """Train one seed; module level so it can run in a worker process."""
    cfg = C.load_config()
    cfg.read_string(cfg_text)
    maze = C.maze_spec(cfg)
    params = C.device_params(cfg, cfg.get("synapse", "profile").strip())
    agent_rng, device_rng = agent_and_device_rngs(seed)
    synapses = device_synapse_array(maze, params, device_rng, **C.synapse_protocol(cfg))
    records: list = []
    q = train(maze, synapses, cfg.getint("maze", "n_trials"), agent_rng,
              C.epsilon_schedule(cfg), log=records)
    path = greedy_path(q, maze)
    return q, records, path


def _write_maze(out: Path, q, records):
    wins = np.array([r.outcome is End.CHEESE for r in records], dtype=float)
    window = np.convolve(wins, np.ones(SUCCESS_WINDOW), "full")[:len(wins)]
    window /= np.minimum(np.arange(1, len(wins) + 1), SUCCESS_WINDOW)
    cumulative = np.cumsum(wins) / np.arange(1, len(wins) + 1)
    return [
        io.write_csv(out / "qtable.csv", ("place_row", "place_col", "action", "conductance_S"), q.rows()),
        io.write_csv(out / "trials.csv", ("trial", "steps", "outcome"),
                     ((r.trial, r.steps, r.outcome.value) for r in records)),
        io.write_csv(out / "success_rate.csv", ("trial", "success_rate_window", "success_rate_cumulative"),
                     zip(range(len(wins)), window.tolist(), cumulative.tolist())),
    ]


def _path_summary(maze, q, records, path) -> dict:
    return {"greedy_path_end": path.end.value, "greedy_path_length": len(path),
            "greedy_start_action": q.greedy_action(maze.start).name,
            "n_potentiated": records[-1].potentiated}


def exp_maze_train(cfg, seed: int, out: Path, seeds=None, workers: int = 1):
    maze = C.maze_spec(cfg)
    text = C.dump_config(cfg)
    if not seeds:
        q, records, path = _train_one(text, seed)
        return _write_maze(out, q, records), _path_summary(maze, q, records, path)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            runs = list(pool.map(_train_one, [text] * len(seeds), seeds))
    else:
        runs = [_train_one(text, s) for s in seeds]
    paths, summary = [], []
    for s, (q, records, path) in zip(seeds, runs):
        paths += _write_maze(out / f"seed_{s}", q, records)
        info = _path_summary(maze, q, records, path)
        summary.append((s, info["greedy_path_end"], info["greedy_path_length"],
                        info["greedy_start_action"], info["n_potentiated"]))
    paths.append(io.write_csv(out / "seeds.csv", ("seed", "greedy_path_end", "greedy_path_length",
                                                  "greedy_start_action", "n_potentiated"), summary))
    n_cheese = sum(row[1] == End.CHEESE.value for row in summary)
    n_north = sum(row[3] == "N" for row in summary)
    return paths, {"n_seeds": len(seeds), "greedy_path_cheese": n_cheese, "start_action_north": n_north}


def exp_xor(cfg, seed: int, out: Path, seeds=None, workers: int = 1):
    neuron = C.build_neuron(cfg)
    if not seeds:
        seeds = list(range(seed, seed + cfg.getint("xor", "n_seeds")))
    trace_d1, trace_d2 = [], []
    neuron.d1.device.recorder, neuron.d2.device.recorder = trace_d1, trace_d2
    first = run_xor(neuron, seeds[:1])
    neuron.d1.device.recorder = neuron.d2.device.recorder = None
    report = run_xor(neuron, seeds)
    cols = ("x", "y", "i_d1_A", "i_d2_A", "i_sum_A", "output")
    table = [(e.x, e.y, e.i_d1, e.i_d2, e.i_sum, e.output) for e in first.rows[seeds[0]]]
    all_rows = [(s, e.x, e.y, e.i_d1, e.i_d2, e.i_sum, e.output)
                for s, evs in report.rows.items() for e in evs]
    plane = [(x, y, i, neuron.soma_threshold) for x, y, i in threshold_plane_data(neuron, seeds[0])]
    event_rows = [("D1", r) for r in trace_d1] + [("D2", r) for r in trace_d2]
    paths = [
        io.write_csv(out / "truth_table.csv", cols, table),
        io.write_csv(out / "xor_seeds.csv", ("seed", *cols), all_rows),
        io.write_csv(out / "threshold_plane.csv", ("x", "y", "i_sum_A", "soma_threshold_A"), plane),
        io.write_csv(out / "events.csv", ("unit_id", *io.TRACE_COLUMNS),
                     ((u, *(getattr(r, c) for c in io.TRACE_COLUMNS)) for u, r in event_rows)),
    ]
    results = {"soma_threshold_A": neuron.soma_threshold, "n_seeds": len(seeds),
               "n_passed": report.n_passed, "min_margin_A": report.min_margin}
    return paths, results


RUNNERS = {
    "iv-sweep": exp_iv_sweep,
    "latency-stats": exp_latency_stats,
    "cavity-design": exp_cavity_design,
    "maze-train": exp_maze_train,
    "xor": exp_xor,
}


# -- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file overlaid on the built-in defaults")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    runnable = argparse.ArgumentParser(add_help=False, parents=[common])
    runnable.add_argument("--seed", type=int, help="RNG seed (default: [run] seed)")
    runnable.add_argument("--out", type=Path, help=f"output directory (default: ${OUTPUT_ENV} or ./optomem-output)")

    ap = argparse.ArgumentParser(prog="optomem", description="Optomemristor simulation experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("iv-sweep", parents=[runnable], help="dark and illuminated I-V sweeps")
    p.add_argument("--profile")
    p.add_argument("--power", type=float, help="illumination power, W")

    p = sub.add_parser("latency-stats", parents=[runnable], help="switching latency statistics")
    p.add_argument("--profile")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("cavity-design", parents=[runnable], help="GeSe3 cavity thickness design")
    p.add_argument("--target", type=float, help="target wavelength, nm")

    for name, helptext in (("maze-train", "three-factor maze learning"), ("xor", "dendritic XOR neuron")):
        p = sub.add_parser(name, parents=[runnable], help=helptext)
        p.add_argument("--seeds", type=parse_seed_range, help="seed sweep a..b (inclusive)")
        p.add_argument("--workers", type=int, default=1, help="processes for a seed sweep")
        p.add_argument("--profile")
    sub.choices["maze-train"].add_argument("--trials", type=int)
    sub.choices["xor"].add_argument("--inhib-power", type=float)

    sub.add_parser("print-config", parents=[common], help="dump the effective configuration")
    return ap


def normalize_argv(argv: list[str]) -> list[str]:
    """Accept ``run <experiment>`` with underscore names as an alias."""
    if argv and argv[0] == "run":
        if len(argv) < 2:
            return ["--help"]
        return [argv[1].replace("_", "-"), *argv[2:]]
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = normalize_argv(list(sys.argv[1:] if argv is None else argv))
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = C.load_config(args.config)
        apply_overrides(cfg, args)
        if args.command == "print-config":
            sys.stdout.write(C.dump_config(cfg))
            return 0
        seed = check_seed(cfg.getint("run", "seed"))
        out_root = args.out or Path(os.environ.get(OUTPUT_ENV, "optomem-output"))
        out = out_root / args.command.replace("-", "_")
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise C.ConfigError(f"output directory not writable: {out}")
    except (C.ConfigError, ValueError) as exc:
        print(f"optomem: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"optomem: config error: {exc}", file=sys.stderr)
        return 2

    runner = RUNNERS[args.command]
    kwargs = {}
    if args.command in ("maze-train", "xor"):
        kwargs = {"seeds": args.seeds, "workers": args.workers}
    try:
        paths, results = runner(cfg, seed, out, **kwargs)
        manifest = io.write_manifest(out, args.command, seed, config_echo(cfg), paths, results)
    except C.ConfigError as exc:
        print(f"optomem: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # any module error is an experiment failure
        log.debug("experiment failed", exc_info=True)
        print(f"optomem: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
