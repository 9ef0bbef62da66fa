"""Command-line interface.

Subcommands: ``gen`` (synthesize a weak dataset), ``marginals`` (posterior
targets for a dataset + probability table), ``train`` (fit the built-in
classifier), ``verify`` (engine-vs-oracle equivalence harness), ``bench``
(forward-backward timing). Exit codes: 0 success, 1 verification failure,
2 usage or data error. Every command prints a single-line JSON run
manifest as its last stdout line (also written next to ``--out``).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__, bench, datagen, io, verify
from .errors import EngineError, InfeasibleSupervision, InvalidParams
from .forward_backward import active_kernel
from .losses import em_targets
from .trainer import TrainConfig, evaluate, init_model, train


def _manifest(command: str, args: argparse.Namespace, started: float,
              exit_status: int, extra: dict | None = None) -> dict:
    params = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")
    }
    doc = {
        "command": command,
        "parameters": params,
        "seed": params.get("seed"),
        "version": __version__,
        "elapsed_seconds": round(time.perf_counter() - started, 6),
        "exit_status": exit_status,
    }
    if extra:
        doc.update(extra)
    return doc


def _emit_manifest(doc: dict, out_path: str | None) -> None:
    line = json.dumps(doc, sort_keys=True)
    if out_path:
        with open(f"{out_path}.manifest.json", "w") as fh:
            fh.write(line + "\n")
    print(line)


def _gaussian_pool(args, seed: int):
    means = datagen.default_means(args.classes, args.dim)
    features, labels = datagen.gen_gaussians(args.per_class, means, args.stddev, seed)
    return features, labels, means


_SETTING_PARAMS = {
    "partial": ("ratio", "group_size"),
    "complementary": ("group_size",),
    "multi_instance": ("bags", "size_mean", "size_std", "bag_prior"),
    "label_proportion": ("bags", "size_mean", "size_std"),
    "pcomp": ("pairs", "prior"),
    "psim": ("pairs", "prior"),
    "simconf": ("pairs", "prior", "teacher_noise"),
    "confdiff": ("pairs", "prior", "teacher_noise"),
    "pos_conf": ("instances", "group_size", "teacher_noise"),
    "pos_unlabeled": ("labeled", "unlabeled", "prior", "group_size"),
    "unlabeled_unlabeled": ("instances", "prior", "group_size"),
    "sd_unlabeled": ("pairs", "unlabeled", "prior", "group_size"),
}

_GROUP_SIZE_DEFAULT = {
    "partial": 25,
    "complementary": 25,
    "pos_conf": 10,
    "pos_unlabeled": 20,
    "unlabeled_unlabeled": 10,
    "sd_unlabeled": 20,
}


def cmd_gen(args) -> int:
    features, labels, means = _gaussian_pool(args, args.seed)
    params = {}
    for name in _SETTING_PARAMS[args.setting]:
        value = getattr(args, name)
        if name == "group_size" and value is None:
            value = _GROUP_SIZE_DEFAULT[args.setting]
        params[name] = value
    if args.setting in ("simconf", "confdiff", "pos_conf"):
        params["means"] = means
        params["stddev"] = args.stddev
    dataset = datagen.weaken(
        features, labels, args.setting, params, seed=args.seed + 1,
        num_classes=args.classes,
    )
    dataset.metadata["generator"] = {
        "classes": args.classes,
        "per_class": args.per_class,
        "stddev": args.stddev,
        "dim": args.dim,
    }
    io.save_dataset(dataset, args.out)
    if args.test_out:
        test_x, test_y = datagen.gen_gaussians(
            args.test_per_class, means, args.stddev, args.seed + 2
        )
        io.save_dataset(
            datagen.labeled_dataset(
                test_x, test_y, {"setting": "full_labels", "seed": args.seed + 2}
            ),
            args.test_out,
        )
    print(f"wrote {len(dataset)} groups ({dataset.total_instances} instances) "
          f"to {args.out}")
    return 0


def cmd_marginals(args) -> int:
    dataset = io.load_dataset(args.dataset)
    probs = io.load_probs(args.probs)
    if probs.shape != (dataset.total_instances, dataset.num_classes):
        raise InvalidParams(
            f"probability table is {probs.shape}, dataset needs "
            f"({dataset.total_instances}, {dataset.num_classes})"
        )
    rows = 0
    records = []
    for i, group in enumerate(dataset.groups):
        block = probs[rows : rows + group.spec.length]
        rows += group.spec.length
        try:
            out = em_targets(group.spec, block)
        except InfeasibleSupervision as exc:
            raise InfeasibleSupervision(f"group {i}: {exc.message}") from exc
        records.append(
            {
                "group": i,
                "log_z": out.log_z,
                "targets": [[float(v) for v in row] for row in out.targets],
            }
        )
    with open(args.out, "w") as fh:
        json.dump({"groups": records}, fh)
        fh.write("\n")
    print(f"wrote marginals for {len(records)} groups to {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = io.load_dataset(args.dataset)
    test = io.load_dataset(args.test)
    test_features = io.flatten_instances(test)
    test_labels = io.dataset_labels(test)
    matching = args.matching or dataset.metadata.get("matching", "none")
    config = TrainConfig(
        epochs=args.epochs,
        batch_groups=args.batch,
        learning_rate=args.lr,
        optimizer=args.optimizer,
        seed=args.seed,
        matching=matching,
        arch=args.model,
        eval_every=args.eval_every,
    )
    model = init_model(
        config.arch, dataset.feature_dim, dataset.num_classes, config.seed,
        hidden=config.hidden,
    )
    initial_accuracy = evaluate(model, test_features, test_labels, matching)
    model, log = train(dataset, config, model, test_features, test_labels)
    final_accuracy = (
        log[-1]["test_accuracy"]
        if log
        else evaluate(model, test_features, test_labels, matching)
    )
    metrics = {
        "setting": dataset.metadata.get("setting", ""),
        "seed": args.seed,
        "model": args.model,
        "matching": matching,
        "initial_test_accuracy": initial_accuracy,
        "final_test_accuracy": final_accuracy,
        "epochs": log,
    }
    io.save_metrics(metrics, args.out)
    print(f"final test accuracy {final_accuracy:.4f} -> {args.out}")
    return 0


def cmd_verify(args) -> int:
    kinds = verify.KINDS if args.kind == "all" else (args.kind,)
    for kind in kinds:
        if kind not in verify.KINDS:
            raise InvalidParams(f"unknown kind {kind!r}; choose from {verify.KINDS}")
    report = verify.run_trials(
        kinds, args.trials, args.max_len, args.seed,
        tolerance=args.tol, inject_fault=args.inject_fault,
    )
    print(f"{report.trials} trials across {len(kinds)} kinds")
    print(f"max |targets - oracle|   {report.max_target_dev:.3e}")
    print(f"max |log_z - oracle|     {report.max_logz_dev:.3e}")
    print(f"max mass-conservation    {report.max_mass_dev:.3e}")
    if not report.passed:
        first = report.failures[0]
        print(f"FAIL first at kind={first['kind']} trial={first['trial']}")
        return 1
    print("PASS")
    return 0


def cmd_bench(args) -> int:
    lengths = [int(v) for v in args.lengths.split(",") if v.strip()]
    kernels = {
        "default": [None],
        "compiled": ["compiled"],
        "python": ["python"],
        "both": ["compiled", "python"],
    }[args.kernel]
    rows = bench.run_bench(
        args.kind, lengths, positives=args.positives, repeats=args.repeats,
        seed=args.seed, kernels=kernels,
    )
    print(f"active kernel: {active_kernel()}")
    print(bench.format_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weaklattice",
        description="weak-supervision lattice engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a weak-supervision dataset")
    g.add_argument("--setting", required=True, choices=datagen.SETTINGS)
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--classes", type=int, default=2)
    g.add_argument("--per-class", type=int, default=2000, dest="per_class")
    g.add_argument("--stddev", type=float, default=1.0)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--ratio", type=float, default=0.5)
    g.add_argument("--bags", type=int, default=500)
    g.add_argument("--size-mean", type=float, default=10.0, dest="size_mean")
    g.add_argument("--size-std", type=float, default=2.0, dest="size_std")
    g.add_argument("--bag-prior", type=float, default=0.2, dest="bag_prior")
    g.add_argument("--pairs", type=int, default=2000)
    g.add_argument("--prior", type=float, default=0.5)
    g.add_argument("--labeled", type=int, default=200)
    g.add_argument("--unlabeled", type=int, default=4000)
    g.add_argument("--instances", type=int, default=3000)
    g.add_argument("--group-size", type=int, default=None, dest="group_size")
    g.add_argument("--teacher-noise", type=float, default=0.0, dest="teacher_noise")
    g.add_argument("--test-out", default=None, dest="test_out")
    g.add_argument("--test-per-class", type=int, default=1000, dest="test_per_class")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("marginals", help="posterior targets for a dataset")
    m.add_argument("--dataset", required=True)
    m.add_argument("--probs", required=True)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_marginals)

    t = sub.add_parser("train", help="train the built-in classifier")
    t.add_argument("--dataset", required=True)
    t.add_argument("--test", required=True)
    t.add_argument("--model", choices=("linear", "mlp"), default="linear")
    t.add_argument("--epochs", type=int, default=30)
    t.add_argument("--lr", type=float, default=0.05)
    t.add_argument("--batch", type=int, default=32)
    t.add_argument("--optimizer", choices=("sgd", "momentum", "adam"), default="adam")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--matching", choices=("none", "permute"), default=None)
    t.add_argument("--eval-every", type=int, default=1, dest="eval_every")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    v = sub.add_parser("verify", help="engine-vs-oracle equivalence check")
    v.add_argument("--kind", default="all")
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--max-len", type=int, default=8, dest="max_len")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--inject-fault", action="store_true", dest="inject_fault",
                   help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="forward-backward timing")
    b.add_argument("--kind", default="lprop", choices=bench.BENCH_KINDS)
    b.add_argument("--lengths", default="100,200,400,800")
    b.add_argument("--positives", type=int, default=5)
    b.add_argument("--repeats", type=int, default=20)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument(
        "--kernel", choices=("default", "compiled", "python", "both"),
        default="default",
    )
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    started = time.perf_counter()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    out_path = getattr(args, "out", None)
    try:
        status = args.func(args)
    except (EngineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = 2
    _emit_manifest(
        _manifest(args.command, args, started, status), out_path if status == 0 else None
    )
    return status


if __name__ == "__main__":
    sys.exit(main())
