"""Command line front end.

Every long option can also be set through an environment variable with the
LFBA_ prefix (--tick-rate becomes LFBA_TICK_RATE).  Explicit flags win over
the environment, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Callable, List, Optional, TypeVar

from . import dataset as dataset_store
from . import eventlog, evaluate, scenes
from .controller import initial_state
from .gateway import GatewayConfig, serve
from .predictor import TrainConfig, save_model, train

T = TypeVar("T")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _env(name: str, cast: Callable[[str], T], fallback: T) -> T:
    raw = os.environ.get("LFBA_" + name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"bad value for LFBA_{name}: {raw!r} ({exc})")


def _env_bool(name: str) -> bool:
    raw = os.environ.get("LFBA_" + name, "").strip().lower()
    if raw in _TRUE:
        return True
    if raw in _FALSE or raw == "":
        return False
    raise SystemExit(f"bad value for LFBA_{name}: {raw!r} (expected true/false)")


def _add_generator_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_env("SEED", int, 0), help="generator seed")
    p.add_argument(
        "--noise",
        type=float,
        default=_env("NOISE", float, 0.05),
        help="pixel noise sigma",
    )
    p.add_argument(
        "--run-effect",
        type=float,
        default=_env("RUN_EFFECT", float, 0.25),
        help="strength of the per-run clothing texture",
    )
    p.add_argument(
        "--jitter",
        type=int,
        default=_env("JITTER", int, 2),
        help="occupant position jitter in pixels",
    )


def _add_train_options(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--learning-rate",
        type=float,
        default=_env("LEARNING_RATE", float, 0.001),
    )
    p.add_argument("--momentum", type=float, default=_env("MOMENTUM", float, 0.9))
    p.add_argument("--batch-size", type=int, default=_env("BATCH_SIZE", int, 10))
    p.add_argument("--epochs", type=int, default=_env("EPOCHS", int, 25))
    p.add_argument(
        "--train-seed",
        type=int,
        default=_env("TRAIN_SEED", int, 0),
        help="epoch shuffle seed",
    )


def _generator_config(args) -> scenes.GeneratorConfig:
    return scenes.GeneratorConfig(
        seed=args.seed,
        pixel_noise_sigma=args.noise,
        run_effect_strength=args.run_effect,
        class_jitter=args.jitter,
    )


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.learning_rate,
        momentum=args.momentum,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.train_seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfba",
        description="Camera-driven facility control: data synthesis, training, "
        "evaluation, live gateway, and event-log replay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="synthesize a labeled dataset")
    g.add_argument("--out", default=_env("DATA", str, None), required="LFBA_DATA" not in os.environ)
    g.add_argument("--runs", type=int, default=_env("RUNS", int, scenes.DEFAULT_RUNS))
    g.add_argument("--scale", type=float, default=_env("SCALE", float, scenes.DEFAULT_SCALE))
    _add_generator_options(g)

    t = sub.add_parser("train", help="fit the classifier on a dataset file")
    t.add_argument("--data", default=_env("DATA", str, None), required="LFBA_DATA" not in os.environ)
    t.add_argument("--out", default=_env("MODEL", str, None), required="LFBA_MODEL" not in os.environ)
    t.add_argument(
        "--exclude-override",
        action="store_true",
        default=_env_bool("EXCLUDE_OVERRIDE"),
        help="drop corrective override samples before training",
    )
    _add_train_options(t)

    e = sub.add_parser("eval", help="train/test evaluation under one regime")
    e.add_argument("--data", default=_env("DATA", str, None), required="LFBA_DATA" not in os.environ)
    e.add_argument(
        "--regime",
        choices=[evaluate.MERGE_SPLIT, evaluate.CROSS_RUN],
        default=_env("REGIME", str, evaluate.MERGE_SPLIT),
    )
    e.add_argument("--fraction", type=float, default=_env("FRACTION", float, 0.8))
    e.add_argument(
        "--split-seed",
        type=int,
        default=_env("SPLIT_SEED", int, 0),
        help="shuffle seed for the merge & split regime",
    )
    e.add_argument("--json", action="store_true", help="emit JSON lines instead of a table")
    _add_train_options(e)

    s = sub.add_parser("serve", help="run the HTTP gateway")
    s.add_argument("--host", default=_env("HOST", str, "127.0.0.1"))
    s.add_argument("--port", type=int, default=_env("PORT", int, 8765))
    s.add_argument("--scene", default=_env("SCENE", str, "A00"))
    s.add_argument("--run", type=int, default=_env("RUN", int, 1))
    s.add_argument("--frame-period", type=float, default=_env("FRAME_PERIOD", float, 1.0))
    s.add_argument("--tick-rate", type=float, default=_env("TICK_RATE", float, 1.0))
    s.add_argument("--paused", action="store_true", default=_env_bool("PAUSED"))
    s.add_argument("--settle-delay", type=float, default=_env("SETTLE_DELAY", float, 5.0))
    s.add_argument("--majority-k", type=int, default=_env("MAJORITY_K", int, 3))
    s.add_argument("--dataset", default=_env("DATASET", str, None), help="recorded sample sink")
    s.add_argument("--model", default=_env("MODEL", str, None), help="checkpoint to load/save")
    s.add_argument("--static", default=_env("STATIC", str, None), help="panel bundle directory")
    s.add_argument(
        "--external-predictor",
        default=_env("EXTERNAL_PREDICTOR", str, None),
        help="POST endpoint consulted instead of the in-process model",
    )
    s.add_argument(
        "--predictor-timeout", type=float, default=_env("PREDICTOR_TIMEOUT", float, 2.0)
    )
    s.add_argument("--event-log", default=_env("EVENT_LOG", str, None))
    s.add_argument(
        "--exclude-override",
        action="store_true",
        default=_env_bool("EXCLUDE_OVERRIDE"),
    )
    _add_generator_options(s)

    r = sub.add_parser("replay", help="re-derive effects from an event log")
    r.add_argument("--log", default=_env("EVENT_LOG", str, None), required="LFBA_EVENT_LOG" not in os.environ)
    r.add_argument("--n", type=int, default=_env("N", int, 4))
    r.add_argument("--settle-delay", type=float, default=_env("SETTLE_DELAY", float, 5.0))
    r.add_argument("--majority-k", type=int, default=_env("MAJORITY_K", int, 3))

    p = sub.add_parser("report", help="summarize a dataset file")
    p.add_argument("--data", default=_env("DATA", str, None), required="LFBA_DATA" not in os.environ)

    return parser


def _cmd_gen_data(args) -> int:
    ds = scenes.generate_dataset(runs=args.runs, scale=args.scale, config=_generator_config(args))
    dataset_store.save(ds, args.out)
    prof = dataset_store.profile(ds)
    print(f"wrote {len(ds)} samples to {args.out}")
    print(prof.render())
    return 0


def _cmd_train(args) -> int:
    ds = dataset_store.load(args.data)
    records = [r for r in ds.records if r.source != "automation"]
    if args.exclude_override:
        records = [r for r in records if r.source != "override"]
    ds = dataset_store.Dataset(n=ds.n, d=ds.d, records=records)
    print(f"training on {len(ds)} samples")
    model, trace = train(ds, _train_config(args))
    save_model(model, args.out)
    for epoch, loss in enumerate(trace, start=1):
        print(f"epoch {epoch:3d}/{len(trace)}  loss {loss:.6f}")
    print(f"saved model ({model.num_classes} classes, {model.feature_dim} features) to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    ds = dataset_store.load(args.data)
    cfg = _train_config(args)
    if args.regime == evaluate.MERGE_SPLIT:
        report = evaluate.run_merge_split(ds, cfg, fraction=args.fraction, seed=args.split_seed)
    else:
        report = evaluate.run_cross_run(ds, cfg)
    if args.json:
        for line in evaluate.report_lines(report):
            print(line)
    else:
        print(evaluate.emit_report(report))
    return 0


def _cmd_serve(args) -> int:
    config = GatewayConfig(
        host=args.host,
        port=args.port,
        frame_period=args.frame_period,
        tick_rate=args.tick_rate,
        start_paused=args.paused,
        settle_delay=args.settle_delay,
        majority_k=args.majority_k,
        scene=args.scene,
        run=args.run,
        seed=args.seed,
        generator=_generator_config(args),
        dataset_path=args.dataset,
        model_path=args.model,
        static_dir=args.static,
        external_predictor=args.external_predictor,
        predictor_timeout=args.predictor_timeout,
        event_log_path=args.event_log,
        train_exclude_override=args.exclude_override,
    )
    gw = serve(config)
    # Flushed eagerly so wrappers watching a pipe see the bound address.
    print(f"gateway listening on {gw.base_url}", flush=True)
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        pass
    finally:
        gw.stop()
    return 0


def _cmd_replay(args) -> int:
    entries = eventlog.read_log(args.log)
    events = [event for event, _ in entries]
    recorded = [effects for _, effects in entries]
    state = initial_state(n=args.n, settle_delay=args.settle_delay, majority_k=args.majority_k)
    final, derived = eventlog.replay(events, state)
    mismatches = 0
    for i, (want, got) in enumerate(zip(recorded, derived)):
        if want != got:
            mismatches += 1
            print(f"line {i + 1}: recorded effects differ from re-derived effects")
            print(f"  recorded:   {want}")
            print(f"  re-derived: {got}")
    counts: dict = {}
    for effects in derived:
        for eff in effects:
            counts[eff["kind"]] = counts.get(eff["kind"], 0) + 1
    print(f"replayed {len(events)} events")
    for kind in sorted(counts):
        print(f"  {kind}: {counts[kind]}")
    print(
        f"final: switches={final.switches} controls={final.controls} "
        f"mode={final.mode.value} degraded={final.degraded}"
    )
    if mismatches:
        print(f"{mismatches} event(s) diverged", file=sys.stderr)
        return 1
    print("log is consistent with the controller")
    return 0


def _cmd_report(args) -> int:
    ds = dataset_store.load(args.data)
    print(dataset_store.profile(ds).render())
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
    "replay": _cmd_replay,
    "report": _cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
