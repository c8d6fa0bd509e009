"""Command-line entry point: ``diagembed {synth,build,walk,embed,experiment}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime/training error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import diagnet, embed, evalkit, synth, walker
from .seeding import derive_rng

log = logging.getLogger("diagembed")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _open_out(path: str):
    return open(path, "w", encoding="utf-8", newline="\n")


def _read_text(path: str):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _load_graph(path: str) -> diagnet.HetNet:
    with _read_text(path) as fh:
        try:
            return diagnet.load_graph(fh)
        except diagnet.ParseError as exc:
            raise DataError(f"{path}: {exc}") from None


def _load_triplets(path: str) -> list[diagnet.Triplet]:
    with _read_text(path) as fh:
        try:
            triplets = diagnet.load_triplets(fh)
        except diagnet.ParseError as exc:
            raise DataError(f"{path}: {exc}") from None
    if not triplets:
        raise DataError(f"{path}: no triplets")
    return triplets


def cmd_synth(args) -> int:
    spec = synth.SynthSpec(args.groups, args.diseases, args.names, args.values, args.overlap, args.noise, args.seed)
    triplets, labels = synth.synth_triplets(spec)
    with _open_out(args.triplets_out) as fh:
        diagnet.write_triplets(triplets, fh)
    with _open_out(args.labels_out) as fh:
        synth.write_labels(labels, fh)
    classes = synth.class_names(labels)
    print(f"triplets: {len(triplets)}  labelled nodes: {len(labels)}  classes: {len(classes)}")
    return EXIT_OK


def cmd_build(args) -> int:
    net = diagnet.build_network(_load_triplets(args.triplets))
    with _open_out(args.graph_out) as fh:
        diagnet.dump_graph(net, fh)
    print(diagnet.format_stats(diagnet.network_stats(net)))
    return EXIT_OK


def _strategy(args):
    if args.node2vec and args.metapath:
        raise UsageError("choose either --node2vec or --metapath, not both")
    if args.metapath:
        try:
            return walker.MetaPaths([walker.MetaPath.parse(m) for m in args.metapath])
        except ValueError as exc:
            raise UsageError(f"invalid meta-path: {exc}") from None
    try:
        return walker.Node2vec(args.p, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_walk(args) -> int:
    strategy = _strategy(args)
    try:
        params = walker.WalkParams(args.r, args.l)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(strategy, walker.MetaPaths) and args.r < len(strategy.paths):
        raise UsageError(f"--r {args.r} is smaller than the number of meta-paths ({len(strategy.paths)})")
    net = _load_graph(args.graph)
    walks = walker.generate_corpus(net, strategy, params, derive_rng(args.seed, "walk"))
    with _open_out(args.out) as fh:
        walker.write_corpus(walks, net.keys, fh)
    truncated = sum(len(w) < params.l for w in walks)
    print(f"walks: {len(walks)}  truncated: {truncated}")
    return EXIT_OK


def _embed_config(args) -> embed.EmbedConfig:
    try:
        opt = embed.RmsProp(args.lr, args.rho, args.eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pairs = args.pairs if args.pairs > 0 else None
    return embed.EmbedConfig(args.dim, args.negatives, args.window, pairs, args.epochs, opt, args.seed)


def cmd_embed(args) -> int:
    net = _load_graph(args.graph)
    with _read_text(args.corpus) as fh:
        try:
            walks = walker.read_corpus(fh, net)
        except ValueError as exc:
            raise DataError(f"{args.corpus}: {exc}") from None
    if not walks:
        raise DataError(f"{args.corpus}: empty corpus")
    config = _embed_config(args)
    rng = derive_rng(args.seed, "embed")
    pairs = walker.extract_skipgrams(walks, config.window, config.pairs, rng)
    if len(pairs) == 0:
        raise DataError(f"{args.corpus}: walks too short to yield skip-gram pairs")
    if args.pairs_out:
        with _open_out(args.pairs_out) as fh:
            walker.write_pairs(pairs, net.keys, fh)
    config.seed = int(rng.integers(2**63 - 1))
    model, report = embed.train_embeddings(pairs, len(net), config, noise=embed.noise_distribution(walks, len(net)))
    with _open_out(args.out) as fh:
        embed.export_embeddings(model, net.keys, fh)
    print(f"pairs seen: {report.pairs_seen}  mean loss: {report.mean_loss:.6f}")
    log.info("training took %.2fs", report.wall_time)
    return EXIT_OK


def _experiment_data(args):
    if args.triplets:
        net = diagnet.build_network(_load_triplets(args.triplets))
        labels = None
        if args.labels:
            with _read_text(args.labels) as fh:
                try:
                    labels = synth.read_labels(fh)
                except ValueError as exc:
                    raise DataError(f"{args.labels}: {exc}") from None
        return net, labels
    spec = synth.SynthSpec(args.groups, args.diseases, args.names, args.values, args.overlap, args.noise,
                           args.synth_seed)
    triplets, labels = synth.synth_triplets(spec)
    return diagnet.build_network(triplets), labels


def cmd_experiment(args) -> int:
    try:
        levels = evalkit.SweepSpec.parse_levels(args.levels)
        sweep = evalkit.SweepSpec(levels, args.repeats, args.seed)
        casegen = evalkit.CaseGenSpec(args.n, args.h)
        walk_params = walker.WalkParams(args.r, args.l)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    methods = args.method or ["multimetapath"]
    for m in methods:
        if m not in evalkit.METHODS:
            raise UsageError(f"unknown method {m!r}")
    pretrain = evalkit.PretrainConfig(walk_params, _embed_config(args), args.p, args.q)
    head = evalkit.HeadConfig(epochs=args.head_epochs, freeze_embedding=args.freeze, pooling=args.pooling)
    net, labels = _experiment_data(args)
    rows = []
    for m in methods:
        if args.task == "classify":
            if labels is None:
                raise UsageError("--labels is required for the classify task with --triplets")
            try:
                items, classes = synth.labeled_nodes(net, labels)
            except KeyError as exc:
                raise DataError(f"labels: {exc.args[0]}") from None
            rows += evalkit.run_classification_sweep(net, items, m, sweep, pretrain, head, args.folds, len(classes))
        else:
            rows += evalkit.run_prediction_sweep(net, m, sweep, casegen, pretrain, head)
        for r in rows[-len(levels):]:
            print(f"{r.method:>14} {r.task} level={r.level:g} f1_micro={r.f1_micro:.4f} f1_macro={r.f1_macro:.4f}"
                  + (f" (skipped: {r.skipped})" if r.skipped else ""))
    out = Path(args.out)
    with _open_out(str(out)) as fh:
        evalkit.write_results_csv(rows, fh)
    for metric in ("f1_micro", "f1_macro"):
        with _open_out(str(out.with_suffix(f".{metric}.tsv"))) as fh:
            evalkit.write_plot_data(rows, metric, fh)
    if all(r.skipped for r in rows):
        log.error("every level was skipped")
        return EXIT_RUNTIME
    return EXIT_OK


def _add_synth_flags(p):
    p.add_argument("--groups", type=int, default=10, help="number of planted groups")
    p.add_argument("--diseases", type=int, default=5, help="diseases per group")
    p.add_argument("--names", type=int, default=20, help="symptom names per group")
    p.add_argument("--values", type=int, default=8, help="size of the shared symptom-value vocabulary")
    p.add_argument("--overlap", type=float, default=0.3, help="probability a disease uses an own-group name")
    p.add_argument("--noise", type=float, default=0.02, help="probability a disease uses another group's name")


def _add_walk_flags(p):
    p.add_argument("--r", type=int, default=10, help="walks per node")
    p.add_argument("--l", type=int, default=80, help="walk length in nodes")
    p.add_argument("--p", type=float, default=1.0, help="node2vec return parameter")
    p.add_argument("--q", type=float, default=1.0, help="node2vec in-out parameter")


def _add_embed_flags(p):
    p.add_argument("--dim", type=int, default=100, help="embedding dimension")
    p.add_argument("--window", type=int, default=5, help="skip-gram context window")
    p.add_argument("--negatives", type=int, default=5, help="negative samples per pair")
    p.add_argument("--pairs", type=int, default=1_000_000, help="skip-gram pair budget (0 = use every pair)")
    p.add_argument("--epochs", type=int, default=1, help="passes over the pairs")
    p.add_argument("--lr", type=float, default=0.001, help="RMSProp learning rate")
    p.add_argument("--rho", type=float, default=0.9, help="RMSProp decay")
    p.add_argument("--eps", type=float, default=1e-7, help="RMSProp epsilon")


def _read_config(path: str) -> dict:
    """``key = value`` lines; keys are flag names without dashes."""
    values = {}
    with _read_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (x.strip() for x in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _apply_config(sub: argparse.ArgumentParser, overrides: dict) -> None:
    actions = {a.dest: a for a in sub._actions}
    unknown = sorted(set(overrides) - set(actions) - {"config"})
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    defaults = {}
    for key, raw in overrides.items():
        action = actions[key]
        try:
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = action.type(raw) if action.type else raw
        except ValueError:
            raise UsageError(f"config key {key}: bad value {raw!r}") from None
    sub.set_defaults(**defaults)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="diagembed", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.subcommands = sub.choices

    p = sub.add_parser("synth", help="generate a synthetic triplet file and labels", formatter_class=fmt)
    _add_synth_flags(p)
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--triplets-out", required=True)
    p.add_argument("--labels-out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build", help="build a network from a triplet file", formatter_class=fmt)
    p.add_argument("triplets", help="TAB-separated disease/name/value file")
    p.add_argument("graph_out", help="edge dump to write")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("walk", help="generate a walk corpus", formatter_class=fmt)
    p.add_argument("--graph", required=True, help="edge dump from 'build'")
    p.add_argument("--out", required=True, help="corpus file to write")
    p.add_argument("--node2vec", action="store_true", help="biased walks (default when no --metapath)")
    p.add_argument("--metapath", action="append", metavar="TYPES",
                   help="meta-path like D,S,N,S,D; repeat for multi-meta-path walks")
    _add_walk_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("embed", help="train skip-gram embeddings from a corpus", formatter_class=fmt)
    p.add_argument("--graph", required=True, help="edge dump; fixes the node set and row order")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="word2vec-style text embedding file")
    p.add_argument("--pairs-out", help="optional center<TAB>context dump")
    p.add_argument("--config", help="key = value file overriding flag defaults")
    _add_embed_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("experiment", help="run a missing-data sweep", formatter_class=fmt)
    p.add_argument("--task", choices=("classify", "predict"), required=True)
    p.add_argument("--method", action="append", choices=evalkit.METHODS,
                   help="embedding method; repeat to compare several (default multimetapath)")
    p.add_argument("--levels", default="0:90:10", help="start:stop:step (inclusive) or comma list")
    p.add_argument("--repeats", type=int, default=10, help="prediction repeats per level")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds for classification")
    p.add_argument("--n", type=int, default=10, help="training cases per disease")
    p.add_argument("--h", type=int, default=10, help="maximum symptoms per case")
    p.add_argument("--head-epochs", type=int, default=10, help="task network training epochs")
    p.add_argument("--freeze", action="store_true", help="keep the embedding layer fixed during task training")
    p.add_argument("--pooling", choices=("mean", "sum"), default="mean", help="symptom pooling for prediction")
    p.add_argument("--triplets", help="triplet file (default: synthetic network)")
    p.add_argument("--labels", help="node_key<TAB>class_name file for classification")
    _add_synth_flags(p)
    p.add_argument("--synth-seed", type=int, default=0)
    _add_walk_flags(p)
    _add_embed_flags(p)
    p.add_argument("--config", help="key = value file overriding flag defaults")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", required=True, help="results CSV; plot data goes next to it")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config(parser.subcommands[args.command], _read_config(args.config))
            args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        return args.func(args)
    except UsageError as exc:
        print(f"diagembed: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"diagembed: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (embed.TrainingError, evalkit.EmptyCaseSetError, ValueError) as exc:
        print(f"diagembed: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
