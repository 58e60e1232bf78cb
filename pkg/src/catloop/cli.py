"""Command-line entry point: train, eval, sweep, breed, table."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time


def _load_config_file(path):
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path) as fh:
        return json.load(fh)


def _write_manifest(out_dir, subcommand, config, seeds, timings, outputs):
    from . import __version__

    manifest = {
        "subcommand": subcommand,
        "config": config,
        "seeds": seeds,
        "tool_version": __version__,
        "output_dir": os.path.abspath(out_dir),
        "outputs": sorted(outputs),
        "timings": timings,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
    return path


def _apply_threads(n):
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def cmd_train(args):
    t0 = time.time()
    overrides = {}
    if args.config:
        overrides.update(_load_config_file(args.config))
    from .env import EnvConfig
    from .ppo.agent import PpoHyperparams
    from .ppo.train import train

    env_keys = set(EnvConfig.__dataclass_fields__)
    hp_keys = set(PpoHyperparams.__dataclass_fields__)
    env_cfg = EnvConfig(**{k: v for k, v in overrides.items() if k in env_keys})
    hp_kwargs = {k: v for k, v in overrides.items() if k in hp_keys}
    if "hidden_sizes" in hp_kwargs:
        hp_kwargs["hidden_sizes"] = tuple(hp_kwargs["hidden_sizes"])
    if args.total_steps:
        hp_kwargs["total_steps"] = args.total_steps
    if args.n_envs:
        hp_kwargs["n_envs"] = args.n_envs
    hp = PpoHyperparams(**hp_kwargs)
    os.makedirs(args.out, exist_ok=True)
    result = train(env_cfg, hp, args.out, master_seed=args.seed,
                   checkpoint_every=args.checkpoint_every, resume_from=args.resume)
    outputs = [os.path.basename(result["curve_path"]),
               os.path.basename(result["final_checkpoint"])]
    _write_manifest(args.out, "train", {"env": env_cfg.to_dict(), "ppo": hp.to_dict()},
                    [args.seed], {"wall_seconds": time.time() - t0}, outputs)
    print(f"trained {hp.total_steps} steps -> {result['final_checkpoint']}")
    return 0


def cmd_eval(args):
    t0 = time.time()
    from .ppo.train import load_checkpoint
    from .ppo.evaluate import evaluate, histogram_csv, histogram_png, save_report

    if not os.path.exists(args.checkpoint):
        print(f"error: checkpoint not found: {args.checkpoint}", file=sys.stderr)
        return 2
    state = load_checkpoint(args.checkpoint)
    os.makedirs(args.out, exist_ok=True)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [0]
    lookup = os.path.join(args.out, "lookup_table.jsonl")
    report, _ = evaluate(state["agent"], state["env_config"], args.episodes, seeds,
                         lookup_path=lookup, eval_horizon=args.horizon)
    report_path = os.path.join(args.out, "evaluation_report.json")
    save_report(report, report_path)
    outputs = ["evaluation_report.json", "lookup_table.jsonl"]
    if report["episodes"] > 0:
        histogram_csv(report, args.out)
        histogram_png(report, os.path.join(args.out, "histograms.png"))
        outputs += [f"hist_{k}.csv" for k in report["histograms"]] + ["histograms.png"]
    _write_manifest(args.out, "eval",
                    {"checkpoint": os.path.abspath(args.checkpoint),
                     "episodes_per_seed": args.episodes, "horizon": args.horizon},
                    seeds, {"wall_seconds": time.time() - t0}, outputs)
    print(f"evaluated {report['episodes']} episodes; success rate {report['success_rate']:.3f}")
    return 0


def cmd_sweep(args):
    t0 = time.time()
    import numpy as np
    from .fock.basis import FockCutoff
    from . import onestep

    os.makedirs(args.out, exist_ok=True)
    grid = onestep.default_tau_grid(args.grid_step)
    if args.tau_min is not None or args.tau_max is not None:
        lo = args.tau_min if args.tau_min is not None else 0.0
        hi = args.tau_max if args.tau_max is not None else 1.0
        grid = grid[(grid >= lo) & (grid <= hi)]
    outputs = []
    if args.kind == "fixed":
        cutoff = FockCutoff(args.dim or 30)
        table = onestep.fixed_target_sweep(grid, args.n_max, cutoff=cutoff,
                                           resident=args.resident or "vacuum")
        table.to_csv(os.path.join(args.out, "sweep_fixed.csv"))
        onestep.plot_fixed_sweep(table, os.path.join(args.out, "sweep_fixed.png"))
        outputs += ["sweep_fixed.csv", "sweep_fixed.png"]
    elif args.kind == "average":
        cutoff = FockCutoff(args.dim or 30)
        table = onestep.fixed_target_sweep(grid, args.n_max, cutoff=cutoff,
                                           resident=args.resident or "vacuum")
        avg = table.average_fixed()
        _write_curve(os.path.join(args.out, "average_fidelity.csv"), table.tau_sq, avg)
        onestep.plot_average(table.tau_sq, avg, os.path.join(args.out, "average_fidelity.png"))
        outputs += ["average_fidelity.csv", "average_fidelity.png"]
    else:  # moving
        cutoff = FockCutoff(args.dim or 40)
        table = onestep.moving_target_sweep(grid, args.n_max, cutoff=cutoff,
                                            resident=args.resident or "orthogonal")
        table.to_csv(os.path.join(args.out, "sweep_moving.csv"))
        onestep.plot_moving_sweep(table, os.path.join(args.out, "sweep_moving.png"))
        avg = table.average_opt()
        _write_curve(os.path.join(args.out, "average_optimal_fidelity.csv"), table.tau_sq, avg)
        onestep.plot_average(table.tau_sq, avg,
                             os.path.join(args.out, "average_optimal_fidelity.png"),
                             label="average optimal fidelity")
        outputs += ["sweep_moving.csv", "sweep_moving.png",
                    "average_optimal_fidelity.csv", "average_optimal_fidelity.png"]
    _write_manifest(args.out, "sweep",
                    {"kind": args.kind, "n_max": args.n_max, "dim": args.dim,
                     "resident": args.resident, "grid_step": args.grid_step,
                     "tau_min": args.tau_min, "tau_max": args.tau_max},
                    [args.seed], {"wall_seconds": time.time() - t0}, outputs)
    print(f"sweep '{args.kind}' written to {args.out}")
    return 0


def _write_curve(path, xs, ys):
    with open(path, "w") as fh:
        fh.write("tau_sq,value\n")
        for x, y in zip(xs, ys):
            fh.write(f"{float(x)!r},{float(y)!r}\n")


def cmd_breed(args):
    t0 = time.time()
    import numpy as np
    from .breeding import load_descriptor, run_pipeline, validate_descriptor
    from .errors import ConfigError
    from .fock.wigner import default_grid, wigner, wigner_png

    try:
        if args.descriptor == "fig8":
            from importlib.resources import files
            desc = json.loads(files("catloop.data").joinpath("fig8.json").read_text())
            validate_descriptor(desc)
        else:
            desc = load_descriptor(args.descriptor)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: bad descriptor: {exc}", file=sys.stderr)
        return 2
    if args.dry_run:
        print(f"descriptor '{desc['name']}' valid: {len(desc['stages'])} stages")
        return 0
    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    results, states = run_pipeline(desc, rng)
    report_path = os.path.join(args.out, "breeding_report.json")
    with open(report_path, "w") as fh:
        json.dump(results, fh, sort_keys=True, indent=1)
    outputs = ["breeding_report.json"]
    xs, ps = default_grid(5.0, 101)
    for i, state in enumerate(states):
        png = os.path.join(args.out, f"stage_{i}_wigner.png")
        wigner_png(png, xs, ps, wigner(state, xs, ps), title=results[i + 1]["stage"])
        outputs.append(os.path.basename(png))
    _write_manifest(args.out, "breed", {"descriptor": desc["name"]}, [args.seed],
                    {"wall_seconds": time.time() - t0}, outputs)
    for entry in results[1:]:
        if "fidelity" in entry:
            print(f"{entry['stage']}: fidelity {entry['fidelity']:.4f}")
    return 0


def cmd_table(args):
    from .lookup import LookupTable

    table = LookupTable(args.table)
    prefix = []
    if args.prefix:
        for item in args.prefix.split(";"):
            r, t, n = item.split(",")
            prefix.append((float(r), float(t), int(n)))
    matches = table.query(prefix)
    json.dump(matches, sys.stdout, sort_keys=True, indent=1)
    print()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="catloop",
                                     description="loop-circuit simulator, RL training and analysis")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap BLAS/OpenMP worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the PPO agent")
    p.add_argument("--config", help="JSON config file (env + ppo keys)")
    p.add_argument("--out", default=os.environ.get("CATLOOP_OUT", "runs/train"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--total-steps", dest="total_steps", type=int, default=None)
    p.add_argument("--n-envs", dest="n_envs", type=int, default=None)
    p.add_argument("--checkpoint-every", type=int, default=20)
    p.add_argument("--resume", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--episodes", type=int, default=250, help="episodes per seed")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--out", default=os.environ.get("CATLOOP_OUT", "runs/eval"))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="single-step parameter sweeps")
    p.add_argument("kind", choices=["fixed", "moving", "average"])
    p.add_argument("--out", default=os.environ.get("CATLOOP_OUT", "runs/sweep"))
    p.add_argument("--n-max", dest="n_max", type=int, default=12)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--resident", choices=["vacuum", "orthogonal"], default=None)
    p.add_argument("--grid-step", dest="grid_step", type=float, default=0.005)
    p.add_argument("--tau-min", dest="tau_min", type=float, default=None)
    p.add_argument("--tau-max", dest="tau_max", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("breed", help="run a breeding pipeline descriptor")
    p.add_argument("descriptor", help="path to a JSON descriptor, or 'fig8' for the bundled one")
    p.add_argument("--out", default=os.environ.get("CATLOOP_OUT", "runs/breed"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dry-run", action="store_true")
    p.set_defaults(func=cmd_breed)

    p = sub.add_parser("table", help="query a lookup table")
    p.add_argument("table")
    p.add_argument("--prefix", default="",
                   help="semicolon-separated r,tau,n triples")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_threads(args.threads)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # config/validation problems exit 2, bugs re-raise
        from .errors import CatloopError
        if isinstance(exc, (CatloopError, ValueError, json.JSONDecodeError)):
            print(f"error: {exc}", file=sys.stderr)
            return 2
        raise


if __name__ == "__main__":
    sys.exit(main())
