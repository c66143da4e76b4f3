"""Command-line interface.

Subcommands cover the full workflow: simulate data with known truth,
scan it into a regulation probability matrix, evaluate the result
against the truth, and inspect the graph-counting priors and the
sample-size ceiling on reported probabilities.

Output files are written to a temporary sibling and renamed into place,
so a failing run never leaves a partial file behind.  All tabular
output is TSV with 17-significant-digit numerics; indices are 0-based.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from .data import DatasetError, ExpressionDataset, correlation_matrix, load_dataset
from .graphs import PRIOR_PRESETS, PriorSpec, build_prior, count_by_model, prior_weights
from .metrics import calibration_table, pr_auc, roc_auc
from .models import CiModel
from .scan import STRATEGIES, full_scan, rank_edges
from .scoring import posterior_upper_bound
from .simulate import (
    GENERATOR_NAME,
    GRN_PRESETS,
    GrnSpec,
    TRIPLET_MODELS,
    TripletSpec,
    gen_triplet_data,
    make_grn_dataset,
    preset_spec,
    transitive_closure,
)

__all__ = ["main"]


def _atomic_write(path, write_body):
    """Write a file via temp-and-rename; no partial file on failure."""
    tmp = f"{path}.part"
    try:
        with open(tmp, "w", newline="") as fh:
            write_body(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_tsv(path, header, rows, formats=None):
    def body(fh):
        fh.write("\t".join(header) + "\n")
        for row in rows:
            if formats is None:
                fh.write("\t".join(str(v) for v in row) + "\n")
            else:
                fh.write("\t".join(f % v for f, v in zip(formats, row)) + "\n")

    _atomic_write(path, body)


def _parse_constraints(path):
    """Read 'require i j' / 'forbid i j' lines into two edge sets."""
    required, forbidden = set(), set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3 or parts[0] not in ("require", "forbid"):
                raise DatasetError(
                    f"{path}:{lineno}: expected 'require I J' or 'forbid I J', got {text!r}"
                )
            i, j = int(parts[1]), int(parts[2])
            if not (0 <= i <= 2 and 0 <= j <= 2 and i != j):
                raise DatasetError(
                    f"{path}:{lineno}: nodes must be distinct indices in 0..2"
                )
            (required if parts[0] == "require" else forbidden).add((i, j))
    return frozenset(required), frozenset(forbidden)


def _prior_from_flags(args):
    """Resolve --prior plus optional --edge-prob / --constraints."""
    name = args.prior
    if name not in PRIOR_PRESETS:
        raise DatasetError(f"unknown prior {name!r}; choose from {sorted(PRIOR_PRESETS)}")
    edge_prob = getattr(args, "edge_prob", None)
    constraints = getattr(args, "constraints", None)
    if edge_prob is None and constraints is None:
        return prior_weights(name), name
    base = PRIOR_PRESETS[name]
    required, forbidden = (frozenset(), frozenset())
    if constraints is not None:
        required, forbidden = _parse_constraints(constraints)
    spec = PriorSpec(
        kind=base.kind,
        bk_root=base.bk_root,
        edge_prob=edge_prob,
        required_edges=required,
        forbidden_edges=forbidden,
    )
    return build_prior(spec), f"{name}+custom"


def _cmd_bound(args):
    weights, _ = _prior_from_flags(args)
    value = posterior_upper_bound(args.n, args.nu, weights)
    print("%.17g" % value)
    return 0


def _cmd_priors(args):
    if args.kind is None:
        columns = ["dag", "dag-bk", "dmag", "dmag-bk"]
        counts = {c: count_by_model(PRIOR_PRESETS[c]) for c in columns}
        print("\t".join(["model"] + columns))
        for model in CiModel:
            print("\t".join([str(int(model))] + [str(int(counts[c][model])) for c in columns]))
        print("\t".join(["all"] + [str(int(counts[c].sum())) for c in columns]))
        return 0
    preset = f"{args.kind}-bk" if args.bk else args.kind
    counts = count_by_model(PRIOR_PRESETS[preset])
    ns = argparse.Namespace(
        prior=preset,
        edge_prob=args.edge_prob,
        constraints=args.constraints,
    )
    weights, _ = _prior_from_flags(ns)
    print("model\tcount\tweight")
    for model in CiModel:
        print(f"{int(model)}\t{int(counts[model])}\t%.17g" % weights[model])
    print(f"all\t{int(counts.sum())}\t1")
    return 0


def _cmd_simulate(args):
    os.makedirs(args.out_dir, exist_ok=True)
    paths = {
        name: os.path.join(args.out_dir, f"{name}.tsv")
        for name in ("markers", "traits", "truth")
    }
    if args.family == "grn":
        if args.preset is not None:
            spec = preset_spec(args.preset, seed=args.seed)
        else:
            spec = GrnSpec(
                n_traits=args.n_traits,
                n_markers=args.n_markers,
                marker_link_prob=args.marker_link_prob,
                edge_count_target=args.edges,
                seed=args.seed,
            )
        dataset, truth, metadata = make_grn_dataset(spec, args.n)
        truth_rows = np.argwhere(truth.direct)
    else:
        spec = TripletSpec(
            model=args.model,
            exogenous=args.exogenous,
            bernoulli_p=args.bernoulli_p,
            seed=args.seed,
        )
        data = gen_triplet_data(spec, args.n)
        dataset = ExpressionDataset(data[:, :1], data[:, 1:])
        truth_rows = np.array([[0, 1]]) if args.model in ("causal", "full") else np.empty((0, 2), int)
        metadata = {
            "generator": GENERATOR_NAME,
            "family": "triplet",
            "n": int(args.n),
            "spec": {
                "model": spec.model,
                "exogenous": spec.exogenous,
                "bernoulli_p": spec.bernoulli_p,
                "seed": spec.seed,
            },
        }
    _atomic_write(
        paths["markers"],
        lambda fh: _write_body_matrix(fh, dataset.marker_names, dataset.markers),
    )
    _atomic_write(
        paths["traits"],
        lambda fh: _write_body_matrix(fh, dataset.trait_names, dataset.traits),
    )
    _write_tsv(paths["truth"], ["regulator", "target"], truth_rows.tolist())
    _atomic_write(
        os.path.join(args.out_dir, "metadata.json"),
        lambda fh: fh.write(json.dumps(metadata, indent=2, sort_keys=True) + "\n"),
    )
    print(
        f"wrote {dataset.n} samples ({dataset.n_markers} markers, "
        f"{dataset.n_traits} traits), {len(truth_rows)} true edges to {args.out_dir}",
        file=sys.stderr,
    )
    return 0


def _write_body_matrix(fh, names, arr):
    fh.write("\t".join(map(str, names)) + "\n")
    for row in np.asarray(arr, dtype=float):
        fh.write("\t".join("%.17g" % v for v in row) + "\n")


def _cmd_scan(args):
    dataset = load_dataset(args.markers, args.traits, delimiter=args.delimiter)
    weights, prior_name = _prior_from_flags(args)
    print(
        f"scanning {dataset.n_traits} traits x {dataset.n_markers} markers "
        f"({dataset.n} samples, prior {prior_name}, strategy {args.strategy})",
        file=sys.stderr,
    )
    started = time.perf_counter()
    corr = correlation_matrix(dataset)
    result = full_scan(
        corr, prior=weights, nu=args.nu, strategy=args.strategy, threads=args.threads
    )
    elapsed = time.perf_counter() - started
    edges = rank_edges(result, args.top_k)
    _write_tsv(
        args.out,
        ["regulator", "target", "probability", "best_marker"],
        edges,
        formats=["%d", "%d", "%.17g", "%d"],
    )
    if args.matrix_out is not None:
        _atomic_write(
            args.matrix_out,
            lambda fh: _write_body_matrix(fh, dataset.trait_names, result.prob),
        )
    print(
        f"done in {elapsed:.2f}s; skipped {result.meta['skipped_triplets']} "
        f"degenerate triplets; wrote {len(edges)} edges to {args.out}",
        file=sys.stderr,
    )
    return 0


def _read_edge_list(path):
    with open(path) as fh:
        header = fh.readline()
        if not header:
            raise DatasetError(f"{path}: file is empty")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            text = line.strip()
            if not text:
                continue
            parts = text.split("\t")
            rows.append((lineno, parts))
    return rows


def _cmd_evaluate(args):
    scan_rows = []
    for lineno, parts in _read_edge_list(args.scan):
        if len(parts) < 3:
            raise DatasetError(f"{args.scan}:{lineno}: expected at least 3 columns")
        scan_rows.append((int(parts[0]), int(parts[1]), float(parts[2])))
    truth_edges = set()
    max_node = max((max(i, j) for i, j, _ in scan_rows), default=-1)
    for lineno, parts in _read_edge_list(args.truth):
        if len(parts) < 2:
            raise DatasetError(f"{args.truth}:{lineno}: expected 2 columns")
        i, j = int(parts[0]), int(parts[1])
        truth_edges.add((i, j))
        max_node = max(max_node, i, j)
    if args.ancestral:
        m = max_node + 1
        direct = np.zeros((m, m), dtype=bool)
        for i, j in truth_edges:
            direct[i, j] = True
        closed = transitive_closure(direct)
        truth_edges = {(int(i), int(j)) for i, j in np.argwhere(closed)}
    scores = np.array([p for _, _, p in scan_rows])
    labels = np.array([(i, j) in truth_edges for i, j, _ in scan_rows])
    roc_points, roc_area = roc_auc(scores, labels)
    pr_points, pr_area = pr_auc(scores, labels)
    table = calibration_table(scores, labels, bins=args.bins, equal_width=args.equal_width)
    prefix = args.out_prefix
    _write_tsv(f"{prefix}.roc.tsv", ["fpr", "tpr"], roc_points, formats=["%.17g", "%.17g"])
    _write_tsv(
        f"{prefix}.pr.tsv", ["recall", "precision"], pr_points, formats=["%.17g", "%.17g"]
    )
    _write_tsv(
        f"{prefix}.calibration.tsv",
        ["mean_score", "event_rate", "count"],
        table,
        formats=["%.17g", "%.17g", "%d"],
    )
    print("roc_auc\t%.17g" % roc_area)
    print("pr_auc\t%.17g" % pr_area)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="triscan",
        description="Marker-conditioned Bayesian scan for regulatory relations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_prior_flags(p, with_strategy=False):
        p.add_argument(
            "--prior",
            default="dmag-bk",
            help="prior preset: dag, dag-bk, dmag, dmag-bk (default dmag-bk)",
        )
        p.add_argument(
            "--edge-prob",
            type=float,
            default=None,
            help="weight graphs by q^present (1-q)^absent instead of counting",
        )
        p.add_argument(
            "--constraints",
            default=None,
            help="file of 'require I J' / 'forbid I J' directed-edge lines (nodes 0..2)",
        )
        p.add_argument("--nu", type=float, default=4.0, help="prior degrees of freedom (> 2)")
        if with_strategy:
            p.add_argument("--strategy", choices=STRATEGIES, default="max")

    p = sub.add_parser("scan", help="score trait pairs from marker and trait files")
    p.add_argument("--markers", required=True)
    p.add_argument("--traits", required=True)
    p.add_argument("--delimiter", default="\t")
    add_prior_flags(p, with_strategy=True)
    p.add_argument("--threads", type=int, default=1, help="worker threads (0 = one per CPU)")
    p.add_argument("--top-k", type=int, default=None, help="write only the strongest K edges")
    p.add_argument("--out", required=True, help="edge list TSV output path")
    p.add_argument("--matrix-out", default=None, help="optional full probability matrix TSV")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("simulate", help="generate synthetic data with known truth")
    p.add_argument("--family", choices=("grn", "triplet"), default="grn")
    p.add_argument("--n", type=int, required=True, help="sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--preset", choices=sorted(GRN_PRESETS), default=None,
                   help="named network size (grn family)")
    p.add_argument("--n-traits", type=int, default=100)
    p.add_argument("--n-markers", type=int, default=100)
    p.add_argument("--marker-link-prob", type=float, default=0.05)
    p.add_argument("--edges", type=float, default=54.0,
                   help="expected direct edge count (grn family)")
    p.add_argument("--model", choices=TRIPLET_MODELS, default="causal",
                   help="generating structure (triplet family)")
    p.add_argument("--exogenous", choices=("gaussian", "bernoulli"), default="gaussian")
    p.add_argument("--bernoulli-p", type=float, default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("evaluate", help="score a scan against a truth edge list")
    p.add_argument("--scan", required=True, help="edge list TSV from the scan subcommand")
    p.add_argument("--truth", required=True, help="TSV of true (regulator, target) rows")
    p.add_argument("--ancestral", action="store_true",
                   help="close the truth edge set transitively first")
    p.add_argument("--bins", type=int, default=5)
    p.add_argument("--equal-width", action="store_true")
    p.add_argument("--out-prefix", required=True,
                   help="writes PREFIX.roc.tsv, PREFIX.pr.tsv, PREFIX.calibration.tsv")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("priors", help="print graph counts per model and prior weights")
    p.add_argument("--kind", choices=("dag", "dmag"), default=None)
    p.add_argument("--bk", action="store_true",
                   help="restrict to graphs with no arrowhead into the marker")
    p.add_argument("--edge-prob", type=float, default=None)
    p.add_argument("--constraints", default=None)
    p.set_defaults(func=_cmd_priors)

    p = sub.add_parser("bound", help="print the probability ceiling for a sample size")
    p.add_argument("--n", type=int, required=True)
    add_prior_flags(p)
    p.set_defaults(func=_cmd_bound)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
