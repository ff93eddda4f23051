"""Command-line front door.

Subcommands: synth (generate a synthetic session), replay (run a session
through registration and emit metrics), report (replay plus rendered
figures), serve (streaming service), glb-info (inspect a GLB asset).

Exit codes: 0 success, 1 usage, 2 input/parse, 3 runtime/IO.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, HeadfitError
from .glb import glb_info
from .replay import AUTO_SCALE_MODES, rows_to_csv, run_replay
from .session import SynthConfig, synth_session, write_session

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract reserves 2 for
    # input/parse failures and uses 1 for usage.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _scale_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected SW,SH, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="headfit",
                     description="Head-model AR registration engine")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic ground-truth session")
    p.add_argument("--dof", choices=("pitch", "yaw", "roll", "static"), default="yaw")
    p.add_argument("--max-deg", type=float, default=45.0)
    p.add_argument("--frames", type=int, default=90)
    p.add_argument("--noise-rot-deg", type=float, default=0.0)
    p.add_argument("--noise-trans", type=float, default=0.0,
                   help="translation noise sigma as a fraction of depth")
    p.add_argument("--scale-mismatch", type=_scale_pair, default=(1.0, 1.0),
                   metavar="SW,SH")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z0", type=float, default=0.5)
    p.add_argument("--image-w", type=int, default=640)
    p.add_argument("--image-h", type=int, default=480)
    p.add_argument("--fov-v-deg", type=float, default=50.0)
    p.add_argument("--return-sweep", action="store_true")
    p.add_argument("--notes", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("replay", help="replay a session and emit metrics")
    _add_replay_args(p)
    p.add_argument("--metrics", help="write the CSV here instead of stdout")
    p.add_argument("--summary", help="write the summary JSON here instead of stdout")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("report", help="replay plus figures rendered to a directory")
    _add_replay_args(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the streaming session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765, help="web-socket port")
    p.add_argument("--tcp-port", type=int, default=8766, help="line-protocol fallback port")
    p.add_argument("--assets", help="directory served model paths are confined to")
    p.add_argument("--record-dir", default="recordings")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("glb-info", help="inspect a GLB asset")
    p.add_argument("file")
    p.set_defaults(func=_cmd_glb_info)

    return parser


def _add_replay_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("session", help="session file (.jsonl)")
    p.add_argument("--model", help="override the session's model_ref")
    p.add_argument("--auto-scale", choices=AUTO_SCALE_MODES, default="off")
    p.add_argument("--alpha", type=float, default=1.0, help="pose smoothing (1 = off)")


def _cmd_synth(args) -> int:
    cfg = SynthConfig(dof=args.dof, max_deg=args.max_deg, frames=args.frames,
                      z0=args.z0, noise_rot_deg=args.noise_rot_deg,
                      noise_trans=args.noise_trans, scale_mismatch=args.scale_mismatch,
                      seed=args.seed, image_w=args.image_w, image_h=args.image_h,
                      fov_v_deg=args.fov_v_deg, return_sweep=args.return_sweep,
                      notes=args.notes)
    header, frames = synth_session(cfg)
    Path(args.out).write_bytes(write_session(header, frames))
    return EXIT_OK


def _cmd_replay(args) -> int:
    rows, agg = run_replay(args.session, model_ref=args.model,
                           auto_scale=args.auto_scale, alpha=args.alpha)
    csv_text = rows_to_csv(rows)
    summary_text = json.dumps(agg.to_json_dict(), indent=2) + "\n"
    if args.metrics:
        Path(args.metrics).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    if args.summary:
        Path(args.summary).write_text(summary_text, encoding="utf-8")
    else:
        sys.stdout.write(summary_text)
    return EXIT_OK


def _cmd_report(args) -> int:
    from .report import render_report_figures

    rows, agg = run_replay(args.session, model_ref=args.model,
                           auto_scale=args.auto_scale, alpha=args.alpha)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "metrics.csv"
    csv_path.write_text(rows_to_csv(rows), encoding="utf-8")
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(agg.to_json_dict(), indent=2) + "\n",
                            encoding="utf-8")
    figures = render_report_figures(rows, agg, out_dir)
    for path in [csv_path, summary_path, *figures]:
        print(path)
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    try:
        serve(host=args.host, ws_port=args.port, tcp_port=args.tcp_port,
              asset_dir=args.assets, record_dir=args.record_dir)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_glb_info(args) -> int:
    info = glb_info(Path(args.file).read_bytes())
    mn, mx = info["aabb_min"], info["aabb_max"]
    print(f"{info['vertex_count']} vertices, {info['triangle_count']} triangles, "
          f"{info['primitive_count']} primitives")
    print(f"AABB [{mn[0]:g}, {mn[1]:g}, {mn[2]:g}] .. [{mx[0]:g}, {mx[1]:g}, {mx[2]:g}]")
    for w in info["warnings"]:
        print(f"warning: {w}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"headfit {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except HeadfitError as e:
        print(f"headfit {args.command}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"headfit {args.command}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
