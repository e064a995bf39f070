"""Command-line entry point: train, eval, serve, prep, count-ops.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import KwsError

MODEL_CHOICES = ("cnn-trad-pool2", "cnn-one-fstride4")


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}: {e}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kwsforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model on a corpus directory")
    p_train.add_argument("--data", required=True, help="corpus root directory")
    p_train.add_argument("--model", choices=MODEL_CHOICES, default="cnn-trad-pool2")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--seeds", type=_parse_seeds, help="comma-separated seeds; runs each and reports mean +/- 95%% CI")
    p_train.add_argument("--lr", type=float, help="learning rate (default: per-model)")
    p_train.add_argument("--momentum", type=float, default=0.0)
    p_train.add_argument("--batch-size", type=int, default=100)
    p_train.add_argument("--epochs", type=int, help="max epochs (default: per-model)")
    p_train.add_argument("--noise-prob", type=float, default=0.8)
    p_train.add_argument("--shift-ms", type=int, default=100, help="max |time shift| in ms")
    p_train.add_argument("--noise-scale-max", type=float, default=0.1)
    p_train.add_argument("--evict-frac", type=float, default=0.3)
    p_train.add_argument("--out", help="checkpoint path (default: <model>.ckpt)")
    p_train.add_argument("--history", help="history TSV path (default: <out>.history.tsv)")
    p_train.add_argument("--no-figure", action="store_true", help="skip the history PNG")
    p_train.add_argument("--print-config", action="store_true")
    p_train.add_argument("--json", action="store_true")

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint or classify one WAV")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--data", help="corpus root (required unless --single)")
    p_eval.add_argument("--split", choices=("train", "validation", "test"), default="test")
    p_eval.add_argument("--single", help="classify one WAV file instead of a split")
    p_eval.add_argument("--figure", help="write a per-class score chart (with --single)")
    p_eval.add_argument("--json", action="store_true")

    p_serve = sub.add_parser("serve", help="run the REST inference service")
    p_serve.add_argument("--checkpoint", help="checkpoint path (or KWS_CHECKPOINT env)")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--bind", default="127.0.0.1")
    p_serve.add_argument("--cors", action="store_true")

    p_prep = sub.add_parser("prep", help="fit a WAV to one second, centered")
    p_prep.add_argument("input")
    p_prep.add_argument("output")

    p_count = sub.add_parser("count-ops", help="per-layer multiply counts")
    p_count.add_argument("model", choices=MODEL_CHOICES)
    p_count.add_argument("--json", action="store_true")

    return parser


def _cmd_train(args) -> int:
    from .dataset import AugmentConfig, scan_dataset
    from .models import save_checkpoint
    from .report import plot_history
    from .training import TrainConfig, multi_seed_run, train, write_history_tsv

    manifest = scan_dataset(args.data)
    config = TrainConfig(
        model_name=args.model,
        learning_rate=args.lr,
        momentum=args.momentum,
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        seed=args.seed,
        augment=AugmentConfig(
            noise_prob=args.noise_prob,
            shift_ms_range=(-args.shift_ms, args.shift_ms),
            noise_scale_range=(0.0, args.noise_scale_max),
            cache_evict_frac=args.evict_frac,
        ),
    )
    if args.print_config:
        print(json.dumps(dataclasses.asdict(config.resolved()), indent=2))

    out = args.out or f"{args.model}.ckpt"

    if args.seeds:
        agg = multi_seed_run(config, args.seeds, manifest)
        if args.json:
            print(
                json.dumps(
                    {
                        "mean_accuracy": agg.mean_accuracy,
                        "ci95_half_width": agg.ci95_half_width,
                        "seeds": {r.seed: r.test_accuracy for r in agg.results},
                    }
                )
            )
        else:
            print(f"test accuracy: {agg.mean_accuracy:.4f} ± {agg.ci95_half_width:.4f} (95% CI, n={len(args.seeds)})")
        return 0

    ckpt, result = train(config, manifest)
    save_checkpoint(ckpt, out)
    history_path = args.history or f"{out}.history.tsv"
    write_history_tsv(result.history, history_path)
    if not args.no_figure:
        plot_history(result.history, f"{history_path}.png")
    if args.json:
        print(
            json.dumps(
                {
                    "checkpoint": out,
                    "seed": result.seed,
                    "epochs_run": result.epochs_run,
                    "best_validation_accuracy": result.best_validation_accuracy,
                    "test_accuracy": result.test_accuracy,
                }
            )
        )
    else:
        print(f"checkpoint written to {out}")
        print(f"test accuracy: {result.test_accuracy:.4f}")
    return 0


def _cmd_eval(args) -> int:
    from .audio import fit_to_length, read_wav
    from .features import mfcc
    from .models import load_checkpoint, predict
    from .training import evaluate

    ckpt = load_checkpoint(args.checkpoint)
    if args.single:
        label, scores = predict(ckpt.model, mfcc(fit_to_length(read_wav(args.single))))
        if args.figure:
            from .report import plot_scores

            plot_scores(ckpt.labels, scores, args.figure)
        if args.json:
            print(json.dumps({"label": label, "scores": {n: float(s) for n, s in zip(ckpt.labels, scores)}}))
        else:
            print(f"label: {label}")
            for name, score in sorted(zip(ckpt.labels, scores), key=lambda t: -t[1]):
                print(f"  {name:10s} {score:.4f}")
        return 0

    if not args.data:
        print("error: --data is required unless --single is given", file=sys.stderr)
        return 2
    from .dataset import scan_dataset

    accuracy = evaluate(ckpt, scan_dataset(args.data), args.split)
    if args.json:
        print(json.dumps({"split": args.split, "accuracy": accuracy}))
    else:
        print(f"accuracy: {accuracy:.4f}")
    return 0


def _cmd_serve(args) -> int:
    from .serving import serve

    serve(args.checkpoint, bind_address=args.bind, port=args.port, cors=args.cors)
    return 0


def _cmd_prep(args) -> int:
    from .audio import fit_to_length, read_wav, write_wav

    write_wav(fit_to_length(read_wav(args.input)), args.output)
    print(f"wrote {args.output}")
    return 0


def _cmd_count_ops(args) -> int:
    from .models import count_multiplies, model_spec

    counts, total = count_multiplies(model_spec(args.model))
    if args.json:
        print(json.dumps({"model": args.model, "layers": {c.name: c.multiplies for c in counts}, "total": total}))
    else:
        for c in counts:
            print(f"{c.name:10s} {c.multiplies:>12,d}")
        print(f"{'total':10s} {total:>12,d}")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
    "prep": _cmd_prep,
    "count-ops": _cmd_count_ops,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except KwsError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
