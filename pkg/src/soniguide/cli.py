"""Command line surface: render a trajectory to WAV, simulate synthetic
sessions, analyze session corpora, and run the streaming service.

Every subcommand is deterministic under an explicit --seed; without one a
fresh seed is drawn from entropy and printed so the run can be repeated.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import secrets
import sys

from . import __version__
from .agents import policies_from_preset, synthesize_session
from .analysis import AnalysisError, ReportOptions, report
from .config import (
    agent_presets,
    layout_spec_from,
    mapping_config_from,
    synth_config_from,
)
from .scene import GroupOrder, SceneError, Trial, load_session, save_session, target_path
from .synth import render_trajectory, write_wav


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(32)
    print(f"seed: {seed}")
    return seed


def cmd_render(args) -> int:
    try:
        with open(args.trajectory) as fh:
            raw = fh.read()
        if not raw.strip():
            print(f"error: {args.trajectory}: file is empty", file=sys.stderr)
            return 2
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            print(
                f"error: {args.trajectory}: line {exc.lineno}, column {exc.colno}: {exc.msg}",
                file=sys.stderr,
            )
            return 2
        try:
            trial = Trial.from_dict(data)
        except KeyError as exc:
            print(f"error: {args.trajectory}: missing field {exc}", file=sys.stderr)
            return 2
        except (SceneError, TypeError, ValueError) as exc:
            print(f"error: {args.trajectory}: {exc}", file=sys.stderr)
            return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    seed = _resolve_seed(args)
    mcfg = mapping_config_from(args.mapping_config)
    scfg = synth_config_from(args.synth_config)
    result = render_trajectory(trial, trial.target, mcfg, scfg, seed=seed)
    write_wav(args.out, result.samples, scfg.sample_rate)
    print(
        f"wrote {args.out}: {len(result.samples) / scfg.sample_rate:.2f} s, "
        f"{result.click_count} clicks, {result.chord_count} chords"
    )
    return 0


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    spec = layout_spec_from(args.layout)
    layout = spec.build_layout()
    path = target_path(layout, spec.path_seed)
    mcfg = mapping_config_from(args.mapping_config)
    presets = agent_presets()
    if args.preset not in presets:
        print(f"error: unknown preset {args.preset!r}, have {sorted(presets)}", file=sys.stderr)
        return 1
    policies = policies_from_preset(presets[args.preset])
    orders = GroupOrder.all_orders()
    try:
        os.makedirs(args.out, exist_ok=True)
        probe = os.path.join(args.out, ".write_probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return 3
    for i in range(args.n):
        pid = f"p{i + 1:03d}"
        session = synthesize_session(
            layout=layout,
            path=path,
            policies=policies,
            order=orders[i % len(orders)],
            mcfg=mcfg,
            start_mark=spec.start_mark,
            participant_id=pid,
            seed=seed + i,
        )
        save_session(session, os.path.join(args.out, f"{pid}.json"))
    print(f"wrote {args.n} sessions to {args.out} (preset {args.preset}, seed {seed})")
    return 0


def cmd_analyze(args) -> int:
    files = sorted(glob.glob(args.sessions))
    if not files:
        print(f"error: no files match {args.sessions!r}", file=sys.stderr)
        return 4
    seed = _resolve_seed(args)
    sessions = [load_session(f) for f in files]
    try:
        rep = report(
            sessions,
            ReportOptions(alpha=args.alpha, n_permutations=args.permutations, seed=seed),
        )
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    csv_path, txt_path = args.out + ".csv", args.out + ".txt"
    with open(csv_path, "w", newline="") as fh:
        fh.write(rep.to_csv())
    with open(txt_path, "w") as fh:
        fh.write(rep.to_text())
    print(f"wrote {csv_path} and {txt_path} ({len(sessions)} sessions)")
    return 0


def cmd_serve(args) -> int:
    from .service import load_service_config, serve

    cfg = load_service_config(
        path=args.config,
        listen=args.listen,
        out_dir=args.out,
        static_dir=args.static_dir,
        transport=args.transport,
        seed=args.seed if args.seed is not None else 0,
    )
    print(f"serving on {cfg.listen} (transport {cfg.transport}, hash {cfg.config_hash()})")
    serve(cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soniguide", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="sonify a recorded trial to a WAV file")
    p.add_argument("trajectory", help="trial JSON file")
    p.add_argument("--out", required=True, help="output WAV path")
    p.add_argument("--mapping-config", default=None)
    p.add_argument("--synth-config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("simulate", help="emit synthetic agent sessions")
    p.add_argument("--n", type=int, default=24, help="number of sessions")
    p.add_argument("--preset", default="default", help="agent policy preset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--layout", default=None)
    p.add_argument("--mapping-config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="statistics report over session files")
    p.add_argument("sessions", help="glob of session JSON files")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--permutations", type=int, default=999)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="run the websocket streaming service")
    p.add_argument("--config", default=None, help="service config JSON")
    p.add_argument("--listen", default=None)
    p.add_argument("--out", default=None, help="session output directory")
    p.add_argument("--static-dir", default=None, help="UI bundle directory")
    p.add_argument("--transport", default=None, choices=["pcm-stream", "params-only"])
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
