"""Operator surface: every subcommand composes the library modules.

Exit codes: 0 success, 1 usage error (flags, missing files), 2 data or
format error (parse failures, binding mismatches).  All outputs are
written atomically and all randomness is seeded, so reruns with the same
flags produce byte-identical files.
"""

import argparse
import os
import sys

from . import attacks, coverage, traceio
from .data import concat_datasets, make_synthetic_dataset
from .errors import BindingError, NncovError
from .model import build_mlp, dataset_accuracy, forward, train_sgd
from .profiler import profile as build_profile
from .tensor import Tensor

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {value}")
    return value


def _unit_float(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {value}")
    return value


def _layer_list(text: str) -> list:
    try:
        sizes = [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError("need at least two positive sizes")
    return sizes


def _require_files(parser: _Parser, paths: list) -> None:
    for p in paths:
        if p is not None and not os.path.isfile(p):
            parser.error(f"input file not found: {p}")


def _require_outdir(parser: _Parser, path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        parser.error(f"output directory does not exist: {parent}")


def build_parser() -> _Parser:
    parser = _Parser(prog="nncov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_command(name, help_text):
        # defaults shown in --help per the CLI contract
        return sub.add_parser(
            name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )

    p = add_command("gen-data", "write a synthetic dataset container")
    p.add_argument("--kind", choices=("blobs", "moons"), default="blobs", help="synthetic distribution")
    p.add_argument("--n", type=_positive_int, default=400, help="sample count")
    p.add_argument("--seed", type=int, default=7, help="PRNG seed")
    p.add_argument("--out", required=True)

    p = add_command("train", "train an MLP with seeded SGD")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--init", help="start from an existing model file instead of a fresh init")
    p.add_argument("--layers", type=_layer_list, help="full size chain, e.g. 2,16,16,2")
    p.add_argument("--activation", choices=("relu", "sigmoid"), default="relu", help="hidden activation")
    p.add_argument("--epochs", type=_positive_int, default=50, help="training epochs")
    p.add_argument("--lr", type=_nonneg_float, default=0.5, help="SGD learning rate")
    p.add_argument("--batch-size", type=_positive_int, default=16, help="mini-batch size")
    p.add_argument("--seed", type=int, default=1, help="init + shuffle seed")

    p = add_command("profile", "derive per-neuron activation bounds")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    p = add_command("cover", "accumulate coverage over a suite and write a report")
    p.add_argument("--model", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--data", nargs="+", help="one or more dataset containers")
    p.add_argument("--trace-in", help="consume a trace stream instead of running forward")
    p.add_argument("--k-sections", type=_positive_int, default=1000, help="sections per neuron")
    p.add_argument("--top-k", type=_positive_int, default=1, help="per-layer top set size")
    p.add_argument("--nc-threshold", type=_unit_float, default=0.75, help="baseline activation threshold")
    p.add_argument("--shards", type=_positive_int, default=1, help="independent states to merge")
    p.add_argument("--out", required=True)

    p = add_command("attack", "generate an adversarial suite")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=sorted(attacks.ATTACKS), required=True)
    p.add_argument("--epsilon", type=_nonneg_float, default=0.3, help="L-infinity budget")
    p.add_argument("--alpha", type=_nonneg_float, default=0.05, help="iterative step size (capped at epsilon)")
    p.add_argument("--iterations", type=_positive_int, default=10, help="iterative attack steps")
    p.add_argument("--clip-min", type=float, default=0.0, help="input domain lower bound")
    p.add_argument("--clip-max", type=float, default=1.0, help="input domain upper bound")
    p.add_argument("--out", required=True)

    p = add_command("diff", "per-criterion delta between two reports")
    p.add_argument("--base", required=True)
    p.add_argument("--extended", required=True)

    p = add_command("inspect", "pretty-print any artifact file")
    p.add_argument("path")
    return parser


def _print_report(report) -> None:
    print(f"kmnc\t{report.kmnc:.6f}")
    print(f"nbc\t{report.nbc:.6f}")
    print(f"snac\t{report.snac:.6f}")
    print(f"tknc\t{report.tknc:.6f}")
    print(f"tknp\t{report.tknp}")
    print(f"nc\t{report.nc:.6f}")


def _cmd_gen_data(args) -> int:
    dataset = make_synthetic_dataset(args.kind, args.n, args.seed)
    traceio.write_dataset(args.out, dataset)
    print(f"wrote\t{args.out}\t{len(dataset)} samples")
    return 0


def _cmd_train(args) -> int:
    dataset = traceio.read_dataset(args.data)
    if args.init:
        model = traceio.read_model(args.init)
    else:
        sizes = args.layers or [dataset.input_size, 16, 16, dataset.num_classes]
        model = build_mlp(sizes, activation=args.activation, seed=args.seed)
    result = train_sgd(
        model, dataset, epochs=args.epochs, lr=args.lr,
        batch_size=args.batch_size, seed=args.seed,
    )
    traceio.write_model(args.out, result.model)
    print(f"train_accuracy\t{result.final_accuracy:.6f}")
    print(f"wrote\t{args.out}")
    return 0


def _cmd_profile(args) -> int:
    model = traceio.read_model(args.model)
    dataset = traceio.read_dataset(args.data)
    prof = build_profile(model, dataset)
    traceio.write_profile(args.out, prof)
    print(f"profiled\t{prof.num_neurons} neurons over {prof.count} inputs")
    print(f"wrote\t{args.out}")
    return 0


def _shard_bounds(total: int, shards: int) -> list:
    base, extra = divmod(total, shards)
    bounds, start = [], 0
    for s in range(shards):
        size = base + (1 if s < extra else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


def _cmd_cover(args) -> int:
    model = traceio.read_model(args.model)
    prof = traceio.read_profile(args.profile)
    config = coverage.CoverageConfig(args.k_sections, args.top_k, args.nc_threshold)

    if args.trace_in:
        header, traces = traceio.read_trace_stream(args.trace_in)
        if header["model_id"] != model.model_id:
            raise BindingError(
                f"trace stream is bound to model {header['model_id']}, "
                f"--model has {model.model_id}"
            )
        def trace_at(i):
            return traces[i]
        total = len(traces)
    else:
        suite = concat_datasets([traceio.read_dataset(p) for p in args.data])
        if suite.input_size != model.input_size:
            raise BindingError(
                f"dataset input_size {suite.input_size} != model input_size {model.input_size}"
            )
        def trace_at(i):
            trace, _ = forward(model, Tensor.row(suite.inputs[i]), suite.ids[i])
            return trace
        total = len(suite)

    states = []
    for start, stop in _shard_bounds(total, args.shards):
        state = coverage.new_state(model, prof, config)
        for i in range(start, stop):
            state.update(trace_at(i))
        states.append(state)
    combined = states[0]
    for state in states[1:]:
        combined = combined.merge(state)
    report = combined.report()
    traceio.write_report(args.out, report)
    _print_report(report)
    return 0


def _cmd_attack(args) -> int:
    model = traceio.read_model(args.model)
    dataset = traceio.read_dataset(args.data)
    cfg = attacks.AttackConfig(
        # alpha is capped at epsilon so fgsm (which ignores it) and the
        # epsilon=0 identity case need no extra flag juggling
        epsilon=args.epsilon, alpha=min(args.alpha, args.epsilon),
        iterations=args.iterations, clip_min=args.clip_min, clip_max=args.clip_max,
    )
    adversarial = attacks.attack_suite(model, dataset, args.method, cfg)
    traceio.write_dataset(args.out, adversarial)
    clean_acc = dataset_accuracy(model, dataset)
    adv_acc = dataset_accuracy(model, adversarial)
    print(f"clean_accuracy\t{clean_acc:.6f}")
    print(f"adversarial_accuracy\t{adv_acc:.6f}")
    print(f"wrote\t{args.out}")
    return 0


def _cmd_diff(args) -> int:
    base = traceio.read_report(args.base)
    extended = traceio.read_report(args.extended)
    delta = coverage.diff(base, extended)
    base_vals = base.ratios()
    ext_vals = extended.ratios()
    for criterion, change in delta.to_dict().items():
        if criterion == "inputs_seen":
            continue
        if criterion == "tknp":
            print(f"tknp\t{base_vals['tknp']}\t{ext_vals['tknp']}\t{change:+d}")
        else:
            print(
                f"{criterion}\t{base_vals[criterion]:.6f}\t{ext_vals[criterion]:.6f}"
                f"\t{change:+.6f}"
            )
    return 0


def _cmd_inspect(args) -> int:
    with open(args.path, "rb") as f:
        head = f.read(4)
    if head == traceio.DATASET_MAGIC:
        ds = traceio.read_dataset(args.path)
        print(f"dataset\t{len(ds)} samples\tinput_size={ds.input_size}\tclasses={ds.num_classes}")
        print(f"provenance\t{ds.provenance}")
    elif head == traceio.TRACE_MAGIC:
        header, traces = traceio.read_trace_stream(args.path)
        print(f"trace-stream\tmodel={header['model_id']}\tlayers={header['layer_sizes']}")
        print(f"records\t{len(traces)}")
    elif head == traceio.STATE_MAGIC:
        state = traceio.read_state(args.path)
        print(f"coverage-state\tmodel={state.model_id}\tprofile={state.profile_hash}")
        print(f"inputs_seen\t{state.inputs_seen}\tpatterns\t{len(state.pattern_set)}")
        _print_report(state.report())
    else:
        import json

        try:
            with open(args.path, "r", encoding="utf-8") as f:
                doc = json.load(f)
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise NncovError(f"{args.path}: unrecognized file: {e}") from e
        kind = doc.get("format") if isinstance(doc, dict) else None
        if kind == "model":
            model = traceio.read_model(args.path)
            chain = " -> ".join(
                [str(model.input_size)] + [str(w) for w in model.layer_sizes]
            )
            acts = ",".join(l.activation for l in model.layers)
            print(f"model\t{model.model_id}\t{chain}\tactivations={acts}")
        elif kind == "profile":
            prof = traceio.read_profile(args.path)
            print(f"profile\tmodel={prof.model_id}\tinputs={prof.count}")
            for j, (lo, hi) in enumerate(zip(prof.lows, prof.highs)):
                print(
                    f"layer {j}\twidth={lo.size}\tlow=[{lo.min():.4f}, {lo.max():.4f}]"
                    f"\thigh=[{hi.min():.4f}, {hi.max():.4f}]"
                )
        elif kind == "report":
            report = traceio.read_report(args.path)
            print(f"report\tmodel={report.model_id}\tinputs={report.inputs_seen}")
            _print_report(report)
        else:
            raise NncovError(f"{args.path}: unrecognized artifact (format {kind!r})")
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "profile": _cmd_profile,
    "cover": _cmd_cover,
    "attack": _cmd_attack,
    "diff": _cmd_diff,
    "inspect": _cmd_inspect,
}

_INPUT_FLAGS = {
    "gen-data": (),
    "train": ("data", "init"),
    "profile": ("model", "data"),
    "cover": ("model", "profile", "trace_in"),
    "attack": ("model", "data"),
    "diff": ("base", "extended"),
    "inspect": ("path",),
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    inputs = [getattr(args, flag, None) for flag in _INPUT_FLAGS[args.command]]
    if args.command == "cover":
        if bool(args.data) == bool(args.trace_in):
            parser.print_usage(sys.stderr)
            print("error: cover needs exactly one of --data or --trace-in", file=sys.stderr)
            return USAGE_EXIT
        inputs.extend(args.data or [])
    try:
        _require_files(parser, [p for p in inputs if p])
        if getattr(args, "out", None):
            _require_outdir(parser, args.out)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return _COMMANDS[args.command](args)
    except NncovError as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
