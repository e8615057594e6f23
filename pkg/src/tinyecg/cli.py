"""Command-line surface for the pipeline.

Subcommands: ingest, train, quantize, eval, stream. Exit codes are 0 on
success, 2 for usage errors (argparse), 3 for missing/malformed input
files, 4 for model checksum failures, 5 when the quantized model blows
the SRAM budget.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import metrics, modelio, quant
from .dsp import FilterSpec
from .ingest import (
    BeatSet,
    ParseError,
    annotation_summary,
    extract_beats,
    load_annotations,
    load_signal,
    merge,
    split,
    summarize,
)
from .labels import CLASSES
from .nn import VARIANTS, DenseModel, predict_labels
from .qrs import RPeakDetector, WindowLostError, emit_window
from .quant import QuantizedModel, predict_labels_quantized
from .train import TrainConfig, fit, fit_weights_only

EXIT_OK = 0
EXIT_INPUT = 3
EXIT_CHECKSUM = 4
EXIT_BUDGET = 5

INFERENCE_MODES = ("default", "quantized", "temporary-dequantized")


def cmd_ingest(args) -> int:
    if len(args.signal) != len(args.annotations):
        raise ParseError("need one --annotations per --signal")
    sets = []
    skipped_other = 0
    for sig_path, ann_path in zip(args.signal, args.annotations):
        signal = load_signal(sig_path, args.sampling_rate)
        annotations = load_annotations(ann_path)
        skipped_other += annotation_summary(annotations).get("OTHER", 0)
        sets.append(extract_beats(signal, annotations))
    beats = merge(sets)
    beats.save(args.out)
    print(summarize(beats))
    if skipped_other:
        print(f"(dropped {skipped_other} annotation(s) outside the four classes)")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    beats = BeatSet.load(args.beats)
    train_set, test_set = split(beats, args.train_fraction, args.seed)
    config = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        seed=args.seed,
        variant=args.variant,
        full_pass=args.full_pass,
    )
    if args.weights_only:
        model, trace = fit_weights_only(train_set, test_set, config)
    else:
        model, trace = fit(train_set, test_set, config)
    modelio.save_model(model, args.out)
    modelio.save_json_mirror(model, str(args.out) + ".json")
    if args.trace:
        trace.save_csv(args.trace)
    print(
        f"trained {args.variant} on {len(train_set)} beats "
        f"({len(test_set)} held out)"
    )
    print(
        f"final loss {trace.losses[-1]:.6f}  "
        f"train acc {trace.train_accuracy:.4f}  test acc {trace.test_accuracy:.4f}"
    )
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_quantize(args) -> int:
    model = modelio.load_model(args.model)
    qmodel = quant.quantize_model(model, args.mode)
    modelio.save_qmodel(qmodel, args.out)
    flops = quant.flops_report(qmodel.shapes)
    memory = quant.memory_report(qmodel)
    if args.json:
        print(
            json.dumps(
                {
                    "flops": {"layers": flops.layers, "total": flops.total},
                    "memory": {
                        "model_param_bytes": memory.model_param_bytes,
                        "model_bytes": memory.model_bytes,
                        "buffer_bytes": memory.buffer_bytes,
                        "total_bytes": memory.total_bytes,
                        "budget_bytes": memory.budget_bytes,
                        "over_budget": memory.over_budget,
                    },
                    "scale": qmodel.qparams.scale,
                    "zero_point": qmodel.qparams.zero_point,
                    "mode": qmodel.qparams.mode,
                }
            )
        )
    else:
        print(quant.format_cost_report(flops, memory))
        print(
            f"scale {qmodel.qparams.scale!r}  zero point {qmodel.qparams.zero_point}"
            f"  mode {qmodel.qparams.mode}"
        )
        if qmodel.qparams.zero_point != 0:
            print("note: nonzero zero point; real 0.0 does not map to code 0")
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_BUDGET if memory.over_budget else EXIT_OK


def _select_split(beats: BeatSet, which: str, fraction: float, seed: int) -> BeatSet:
    if which == "all":
        return beats
    train_set, test_set = split(beats, fraction, seed)
    return train_set if which == "train" else test_set


def cmd_eval(args) -> int:
    beats = BeatSet.load(args.beats)
    beats = _select_split(beats, args.split, args.train_fraction, args.seed)
    if len(beats) == 0:
        print("error: no beats to evaluate", file=sys.stderr)
        return EXIT_INPUT
    model = modelio.load_any(args.model)

    if args.inference_mode == "default":
        if isinstance(model, QuantizedModel):
            print(
                "error: default mode needs a float model file, got a quantized one",
                file=sys.stderr,
            )
            return EXIT_INPUT
        predicted = predict_labels(model, beats.windows)
    else:
        if isinstance(model, DenseModel):
            model = quant.quantize_model(model)
            print("(quantizing float model symmetrically on the fly)", file=sys.stderr)
        predicted = predict_labels_quantized(
            model, beats.windows, temporary=args.inference_mode == "temporary-dequantized"
        )

    report = metrics.scores(metrics.confusion(beats.labels, predicted))
    if args.json:
        print(json.dumps(metrics.report_to_dict(report)))
    elif args.csv:
        print(metrics.report_to_csv(report), end="")
    else:
        print(metrics.format_report(report))
    return EXIT_OK


def cmd_stream(args) -> int:
    signal = load_signal(args.signal, args.sampling_rate)
    qmodel = modelio.load_qmodel(args.qmodel)
    detector = RPeakDetector(FilterSpec(args.sampling_rate))
    pending: list[int] = []
    events = 0
    for raw in signal.samples:
        r = detector.push_sample(raw)
        if r is not None:
            pending.append(r)
        still_waiting = []
        for r_index in pending:
            try:
                window = emit_window(detector.buffer, r_index)
            except WindowLostError:
                print(f"# beat at {r_index} lost (buffer overflow)", file=sys.stderr)
                continue
            if window is None:
                still_waiting.append(r_index)
                continue
            label = CLASSES[
                int(np.argmax(quant.forward_temporary_dequantized(qmodel, window)))
            ]
            print(f"{r_index},{label}")
            if label != "N":
                print(f"ALERT,{r_index},{label}")
            events += 1
        pending = still_waiting
    print(f"# {events} beat(s) classified", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tinyecg",
        description="ECG beat detection, dense-net arrhythmia classification, "
        "int8 quantization and SRAM budgeting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="CSV recordings -> preprocessed labeled beats")
    p.add_argument("--signal", action="append", required=True,
                   help="signal CSV (`index,value`); repeatable per record")
    p.add_argument("--annotations", action="append", required=True,
                   help="annotation CSV (`index,symbol`); one per --signal")
    p.add_argument("--out", required=True, help="output beats file (.npz)")
    p.add_argument("--sampling-rate", type=float, default=360.0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train one model variant on a beats file")
    p.add_argument("--beats", required=True)
    p.add_argument("--variant", choices=sorted(VARIANTS), default="sigmoid-sigmoid")
    p.add_argument("--epochs", type=int, default=10_000)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--batch-size", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.67)
    p.add_argument("--full-pass", action="store_true",
                   help="sweep the full training set each epoch instead of one batch")
    p.add_argument("--weights-only", action="store_true",
                   help="pin biases at zero (compression ablation)")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--trace", help="optional epoch,loss CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("quantize", help="float model -> int8 model + cost report")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("symmetric", "asymmetric"), default="symmetric")
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("eval", help="score a model against a beats file")
    p.add_argument("--model", required=True, help="float or quantized model file")
    p.add_argument("--beats", required=True)
    p.add_argument("--inference-mode", choices=INFERENCE_MODES, default="default")
    p.add_argument("--split", choices=("all", "train", "test"), default="all")
    p.add_argument("--train-fraction", type=float, default=0.67)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stream", help="replay a recording through detection + classification")
    p.add_argument("--signal", required=True)
    p.add_argument("--qmodel", required=True, help="quantized model file")
    p.add_argument("--sampling-rate", type=float, default=360.0)
    p.set_defaults(func=cmd_stream)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_INPUT
    except modelio.ChecksumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECKSUM
    except ValueError as exc:  # ParseError and precondition violations
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
