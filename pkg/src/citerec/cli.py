"""Command-line entry point: ingest -> slice -> sample -> train ->
recommend -> evaluate, plus plot-data emission.

All randomness flows from a single --seed flag; every subcommand is
deterministic given identical inputs and seed.  A config file in
``key = value`` format supplies defaults that flags override.
"""

from __future__ import annotations

import argparse
import hashlib
import sys

from . import __version__
from .graph import CitationGraph, load_graph
from .sampling import SamplingParams, WalkCorpus, generate_walk_corpus, cocitation_corpus
from .embedding import TrainParams, init_model, train, save_model, load_model
from .ranking import recommend, write_ranked_csv
from .baselines import PageRankParams
from .evaluation import (ExperimentConfig, build_queries, run_experiment,
                         write_report, write_queries)


def params_hash(params: dict) -> str:
    blob = ";".join(f"{k}={params[k]}" for k in sorted(params))
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


def read_config(path):
    cfg = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k] = v
    return cfg


def _load_any_graph(path, nodes=None):
    if str(path).endswith(".npz"):
        return CitationGraph.load_cache(path)
    return load_graph(path, nodes)


def cmd_ingest(args):
    g = load_graph(args.edges, args.nodes)
    g.save_cache(args.output)
    print(f"ingest: {g.n} nodes, {g.m} edges "
          f"({g.self_loops_dropped} self-loops, "
          f"{g.duplicate_edges_dropped} duplicates dropped) -> {args.output}")
    return 0


def cmd_slice(args):
    g = _load_any_graph(args.graph, args.nodes)
    sl = g.time_slice(args.year)
    sl.save_cache(args.output)
    print(f"slice: year<={args.year}: {sl.n} nodes, {sl.m} edges -> {args.output}")
    return 0


def cmd_sample(args):
    g = _load_any_graph(args.graph, args.nodes)
    if args.strategy == "cocit":
        corpus = cocitation_corpus(g, args.n, seed=args.seed)
    else:
        params = SamplingParams(n=args.n, t=args.t, p=args.p, q=args.q,
                                seed=args.seed)
        corpus = generate_walk_corpus(g, params, strategy=args.strategy)
    corpus.params["params_hash"] = params_hash(corpus.params)
    corpus.save(args.output, g)
    print(f"sample: strategy={args.strategy} {len(corpus)} sequences -> {args.output}")
    return 0


def cmd_train(args):
    g = _load_any_graph(args.graph, args.nodes)
    corpus = WalkCorpus.load(args.corpus, g)
    params = TrainParams(dim=args.dim, window=args.window, epochs=args.epochs,
                         lr=args.lr, lr_min=args.lr_min, mode=args.mode,
                         negatives=args.negatives, seed=args.seed)
    model = train(init_model(g, params), corpus, params)
    save_model(model, args.output)
    print(f"train: mode={params.mode} d={params.dim} epochs={params.epochs} "
          f"-> {args.output} (+.out)")
    return 0


def cmd_recommend(args):
    seeds = [s for s in args.seeds.split(",") if s]
    model = load_model(args.model) if args.model else None
    graph = _load_any_graph(args.graph, args.nodes) if args.graph else None
    ranked = recommend(args.method, seeds, args.k, model=model, graph=graph,
                       pr_params=PageRankParams(damping=args.damping))
    write_ranked_csv(args.output, ranked)
    print(f"recommend: method={args.method} |S|={len(seeds)} "
          f"top-{len(ranked)} -> {args.output}")
    return 0


def cmd_evaluate(args):
    g = _load_any_graph(args.graph, args.nodes)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    ks = tuple(int(k) for k in args.k_values.split(","))
    methods = tuple(args.methods.split(","))
    cfg = ExperimentConfig(
        hidden_ratios=ratios, n_queries=args.queries,
        ref_range=(args.min_refs, args.max_refs),
        year_range=(args.min_year, args.max_year),
        k_values=ks, methods=methods, seed=args.seed)

    queries_by_ratio = {r: build_queries(g, cfg, r) for r in ratios}
    years = sorted({q.year - 1 for qs in queries_by_ratio.values() for q in qs})
    graphs, models = {}, {}
    sparams = SamplingParams(n=args.n, t=args.t, seed=args.seed)
    tparams = TrainParams(dim=args.dim, window=args.window, epochs=args.epochs,
                          mode=args.mode, seed=args.seed)
    embedding_needed = any(m in ("simavg", "simwgd", "simref", "citmod")
                           for m in methods)
    for y in years:
        graphs[y] = g.time_slice(y)
        if embedding_needed:
            if args.strategy == "cocit":
                corpus = cocitation_corpus(graphs[y], args.n, seed=args.seed)
            else:
                corpus = generate_walk_corpus(graphs[y], sparams, args.strategy)
            models[y] = train(init_model(graphs[y], tparams), corpus, tparams)
    records, aggregates = run_experiment(
        g, cfg, graphs, models, queries_by_ratio=queries_by_ratio)
    write_report(args.output, aggregates)
    if args.queries_out:
        all_queries = [q for r in sorted(queries_by_ratio)
                       for q in queries_by_ratio[r]]
        write_queries(args.queries_out, all_queries)
    nq = sum(len(v) for v in queries_by_ratio.values())
    print(f"evaluate: {nq} queries, {len(methods)} methods, "
          f"{len(ratios)} ratios -> {args.output}")
    return 0


def cmd_plotdata(args):
    rows = []
    with open(args.report, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        for line in f:
            rows.append(dict(zip(header, line.strip().split(","))))
    methods = sorted({r["method"] for r in rows})
    ks = sorted({int(r["k"]) for r in rows})
    ratios = sorted({float(r["hidden_ratio"]) for r in rows})

    # recall vs k, one series per method, at each hidden ratio
    with open(args.prefix + "_recall_vs_k.csv", "w", encoding="utf-8") as f:
        f.write("hidden_ratio,k," + ",".join(methods) + "\n")
        for ratio in ratios:
            for k in ks:
                vals = []
                for m in methods:
                    match = [r for r in rows if r["method"] == m
                             and int(r["k"]) == k
                             and float(r["hidden_ratio"]) == ratio]
                    vals.append(match[0]["mean_recall"] if match else "")
                f.write(f"{ratio:g},{k}," + ",".join(vals) + "\n")
    # recall vs hidden ratio, one series per method, at each k
    with open(args.prefix + "_recall_vs_ratio.csv", "w", encoding="utf-8") as f:
        f.write("k,hidden_ratio," + ",".join(methods) + "\n")
        for k in ks:
            for ratio in ratios:
                vals = []
                for m in methods:
                    match = [r for r in rows if r["method"] == m
                             and int(r["k"]) == k
                             and float(r["hidden_ratio"]) == ratio]
                    vals.append(match[0]["mean_recall"] if match else "")
                f.write(f"{k},{ratio:g}," + ",".join(vals) + "\n")
    print(f"plotdata: {len(rows)} report rows -> {args.prefix}_recall_vs_k.csv, "
          f"{args.prefix}_recall_vs_ratio.csv")
    return 0


def _add_graph_args(p):
    p.add_argument("--graph", required=True,
                   help="edge file or .npz graph cache")
    p.add_argument("--nodes", default=None, help="node-year file")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="citerec",
        description="Citation recommendation from citation-graph embeddings")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse edge/node files into a binary cache")
    p.add_argument("--edges", required=True, help="tab-separated edge file")
    p.add_argument("--nodes", default=None, help="tab-separated node-year file")
    p.add_argument("--output", required=True, help="output .npz cache")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("slice", help="remove papers published after a year")
    _add_graph_args(p)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--output", required=True, help="output .npz cache")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("sample", help="generate a walk / co-citation corpus")
    _add_graph_args(p)
    p.add_argument("--strategy", choices=["uniform", "biased", "cocit"],
                   default="uniform")
    p.add_argument("--n", type=int, default=10, help="passes over the graph")
    p.add_argument("--t", type=int, default=80, help="walk length")
    p.add_argument("--p", type=float, default=1.0, help="return parameter")
    p.add_argument("--q", type=float, default=1.0, help="in-out parameter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train an embedding model on a corpus")
    _add_graph_args(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--lr-min", type=float, default=0.0001)
    p.add_argument("--mode", choices=["exact", "neg"], default="neg")
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True,
                   help="model file (companion .out written alongside)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("recommend", help="rank candidates for a seed set")
    p.add_argument("--method", required=True,
                   choices=["simavg", "simwgd", "simref", "citmod",
                            "paperrank", "cf"])
    p.add_argument("--seeds", required=True, help="comma-separated paper ids")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--model", default=None, help="embedding model file")
    p.add_argument("--graph", default=None, help="edge file or .npz cache")
    p.add_argument("--nodes", default=None)
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--output", required=True, help="ranked CSV")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", help="run the random-hide experiment")
    _add_graph_args(p)
    p.add_argument("--ratios", default="0.1", help="comma-separated hidden ratios")
    p.add_argument("--queries", type=int, default=2500)
    p.add_argument("--min-refs", type=int, default=20)
    p.add_argument("--max-refs", type=int, default=200)
    p.add_argument("--min-year", type=int, default=2005)
    p.add_argument("--max-year", type=int, default=2010)
    p.add_argument("--k-values", default="10,25,50,100")
    p.add_argument("--methods", default=",".join(
        ["simavg", "simwgd", "simref", "citmod", "paperrank", "cf"]))
    p.add_argument("--strategy", choices=["uniform", "biased", "cocit"],
                   default="cocit")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--t", type=int, default=80)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--mode", choices=["exact", "neg"], default="neg")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="aggregate report CSV")
    p.add_argument("--queries-out", default=None,
                   help="also write the sampled queries")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plotdata",
                       help="convert a report CSV into plot series")
    p.add_argument("--report", required=True)
    p.add_argument("--prefix", required=True, help="output file prefix")
    p.set_defaults(func=cmd_plotdata)
    return ap


def apply_config_defaults(argv):
    """--config FILE supplies defaults; explicit flags still win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    argv = argv[:i] + argv[i + 2:]
    cfg = read_config(path)
    extra = []
    for k, v in cfg.items():
        flag = "--" + k.replace("_", "-")
        if flag not in argv:
            extra += [flag, v]
    # injected defaults go before user flags
    return extra + argv


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    if len(argv) > 1:
        argv = [argv[0]] + apply_config_defaults(argv[1:])
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
