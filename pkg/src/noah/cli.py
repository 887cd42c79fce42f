"""Command-line driver: partition, fit, generate, eval, compare, bench.

Exit status is 0 on success, 2 for invalid input or arguments and 1 when a
run fails after its inputs were accepted.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .baseline import hypercl_generate
from .datasets import duplicate_attributes, duplicate_edges
from .fit import FitConfig, FitDivergedError, fit
from .generator import NOAH, NOAH_CF, NoahParams, generate, normalize_mode
from .hgraph import (
    HypergraphFormatError,
    _atomic_write_text,
    load_attributes,
    load_hypergraph,
    write_hypergraph,
)
from .metrics import (
    DEFAULT_HOHE_ROUNDS,
    DEFAULT_S_LIST,
    interplay_discrepancy,
    interplay_report,
    structural_report,
)
from .partition import DEFAULT_ROUNDS, CoreFringePartition, read_core_file, umhs_partition

logger = logging.getLogger("noah")

HYPERCL = "hypercl"
STREAMS = ("partition", "fit-init", "generation")
EDGES_FILE, ATTRS_FILE = "hyperedges.txt", "node-attributes.txt"


class UsageError(ValueError):
    pass


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one pipeline stage, derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(STREAMS.index(name),)))


# -- small IO helpers ----------------------------------------------------------

def _write_json(path, obj):
    _atomic_write_text(path, json.dumps(obj, indent=2) + "\n")


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _atomic_write_text(path, buf.getvalue())


def _write_core(path, partition: CoreFringePartition):
    _atomic_write_text(path, "".join(f"{v}\n" for v in partition.core_ids))


def _load_input(args):
    if not args.edges or not args.attrs:
        raise UsageError("--edges and --attrs are required")
    return load_hypergraph(args.edges, args.attrs)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _partition_for(args, H, mode):
    if mode == NOAH_CF:
        return CoreFringePartition.all_core(H.node_count)
    if getattr(args, "partition", None):
        P = read_core_file(args.partition, H.node_count)
        P.check(H)
        return P
    return umhs_partition(H, args.rounds, stream(args.seed, "partition"))


def _fit_config(args) -> FitConfig:
    base = FitConfig.parse(Path(args.config).read_text(encoding="utf-8")) if args.config else FitConfig()
    overrides = {
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "w_deg": args.w_deg,
        "w_card": args.w_card,
    }
    d = {k: v for k, v in vars(base).items()}
    d.update({k: v for k, v in overrides.items() if v is not None})
    if args.grad_check:
        d["grad_check"] = True
    if args.no_normalize:
        d["normalize_core"] = False
    return FitConfig(**d)


# -- subcommands ---------------------------------------------------------------

def cmd_partition(args):
    H = _load_input(args)
    P = umhs_partition(H, args.rounds, stream(args.seed, "partition"))
    out = _outdir(args)
    _write_core(out / "core.txt", P)
    summary = {"nodes": H.node_count, "core": len(P.core), "fringe": len(P.fringe), "rounds": args.rounds}
    _write_json(out / "partition.json", summary)
    print(f"|C| = {summary['core']}  |F| = {summary['fringe']}  (R = {args.rounds})")


def cmd_fit(args):
    H = _load_input(args)
    mode = normalize_mode(args.model)
    cfg = _fit_config(args)
    P = _partition_for(args, H, mode)
    t0 = time.perf_counter()
    params, trace = fit(H, P, cfg, stream(args.seed, "fit-init"))
    elapsed = time.perf_counter() - t0
    out = _outdir(args)
    _atomic_write_text(out / "params.json", params.to_json() + "\n")
    _write_core(out / "core.txt", P)
    trace.write_csv(out / "trace.csv")
    _write_json(out / "fit.json", {
        "model": mode,
        "seed": args.seed,
        "config": vars(cfg),
        "core": len(P.core),
        "fringe": len(P.fringe),
        "skipped_edges": trace.skipped_edges,
        "final_loss": trace.total[-1],
        "seconds": elapsed,
        "grad_check_error": trace.grad_check_error,
        "grad_check_ties": trace.grad_check_ties,
    })
    if trace.skipped_edges:
        logger.warning("%d hyperedges without a core node were left out of the loss", len(trace.skipped_edges))
    if trace.grad_check_error is not None:
        note = " (sorted-MSE ties at the initial point)" if trace.grad_check_ties else ""
        print(f"max relative gradient error: {trace.grad_check_error:.3e}{note}")
    print(f"fit {mode}: {len(trace)} epochs, final L = {trace.total[-1]:.6g}, {elapsed:.2f}s")


def cmd_generate(args):
    model = args.model
    out = _outdir(args)
    rng = stream(args.seed, "generation")
    if model == HYPERCL:
        G = hypercl_generate(_load_input(args), rng)
    else:
        mode = normalize_mode(model)
        if not args.params or not args.attrs:
            raise UsageError("--params and --attrs are required for NoAH generation")
        params = NoahParams.from_json(Path(args.params).read_text(encoding="utf-8"))
        X = load_attributes(args.attrs)
        m = args.m
        if m is None:
            if not args.edges:
                raise UsageError("give -m or --edges to set the number of hyperedges")
            m = load_hypergraph(args.edges, args.attrs).num_edges
        if mode == NOAH_CF:
            P = CoreFringePartition.all_core(X.shape[0])
        else:
            core_path = args.partition or Path(args.params).with_name("core.txt")
            P = read_core_file(core_path, X.shape[0])
        G = generate(params, P, X, m, rng, mode=mode)
    write_hypergraph(G, out / EDGES_FILE, out / ATTRS_FILE)
    print(f"wrote {G.num_edges} hyperedges to {out / EDGES_FILE}")


def _s_list(args):
    return tuple(args.s_list)


def _report_rows(rep, source):
    rows = []
    for name, dists in (("HE", rep.hyperedge_entropy), ("HOHE", rep.higher_order_entropy),
                        ("NHS", rep.node_homophily)):
        for l, d in enumerate(dists):
            rows.extend((name, l, source, repr(float(v))) for v in d)
    return rows


def _structural_rows(st, source):
    rows = []
    for kind, vals in (("degree", st.degrees), ("size", st.sizes), ("singular_value", st.singular_values)):
        rows.extend((source, kind, i, repr(float(v)) if kind == "singular_value" else int(v))
                    for i, v in enumerate(vals))
    return rows


def cmd_eval(args):
    H = _load_input(args)
    rep = interplay_report(H, _s_list(args), args.hohe_rounds)
    st = structural_report(H, args.top_k_sv)
    out = _outdir(args)
    _write_json(out / "report.json", {"metrics": rep.to_dict(), "structure": st.to_dict()})
    _write_csv(out / "distributions.csv", ["measure", "attribute", "source", "value"], _report_rows(rep, "input"))
    _write_csv(out / "structure.csv", ["source", "kind", "index", "value"], _structural_rows(st, "input"))
    print(f"report written to {out / 'report.json'}")


def cmd_compare(args):
    H = _load_input(args)
    if not args.gen_edges:
        raise UsageError("--gen-edges is required")
    G = load_hypergraph(args.gen_edges, args.gen_attrs or args.attrs)
    s_list = _s_list(args)
    rep = interplay_discrepancy(H, G, s_list, args.hohe_rounds)
    real = interplay_report(H, s_list, args.hohe_rounds)
    st_real, st_gen = structural_report(H, args.top_k_sv), structural_report(G, args.top_k_sv)
    out = _outdir(args)
    _atomic_write_text(out / "compare.json", rep.to_json(indent=2) + "\n")
    _write_json(out / "structure.json", {"real": st_real.to_dict(), "generated": st_gen.to_dict()})
    _write_csv(out / "distributions.csv", ["measure", "attribute", "source", "value"],
               _report_rows(real, "real") + _report_rows(rep, "generated"))
    _write_csv(out / "structure.csv", ["source", "kind", "index", "value"],
               _structural_rows(st_real, "real") + _structural_rows(st_gen, "generated"))
    for key, val in rep.discrepancies.items():
        print(f"{key:>5} {val:.6g}")


def cmd_bench(args):
    H = _load_input(args)
    factors = sorted(set(args.factors))
    if factors[0] != 1:
        factors = [1] + factors
    cfg = _fit_config(args)
    P = umhs_partition(H, args.rounds, stream(args.seed, "partition"))
    rows = []
    for axis, dup in (("edges", duplicate_edges), ("attributes", duplicate_attributes)):
        for f in factors:
            Hf = dup(H, f)
            t0 = time.perf_counter()
            params, _ = fit(Hf, P, cfg, stream(args.seed, "fit-init"))
            t_fit = time.perf_counter() - t0
            t0 = time.perf_counter()
            generate(params, P, Hf.attributes, Hf.num_edges, stream(args.seed, "generation"))
            t_gen = time.perf_counter() - t0
            rows.append((axis, f, Hf.num_edges, Hf.num_attributes, f"{t_fit:.6f}", f"{t_gen:.6f}"))
            print(f"{axis:>10} x{f:<4} m={Hf.num_edges:<7} k={Hf.num_attributes:<4} "
                  f"fit {t_fit:8.3f}s  generate {t_gen:8.3f}s")
    _write_csv(_outdir(args) / "bench.csv", ["axis", "factor", "m", "k", "fit_seconds", "generate_seconds"], rows)


# -- argument parsing ----------------------------------------------------------

def _int_list(text):
    try:
        vals = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="noah", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default):
        sp.add_argument("--edges", help="hyperedge list, one hyperedge per line")
        sp.add_argument("--attrs", help="binary attribute matrix, one node per line")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--seed", type=_seed, default=0, help="master random seed")

    def fit_opts(sp):
        sp.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS, help="minimal hitting set rounds")
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--lr", type=float)
        sp.add_argument("--w-deg", type=float)
        sp.add_argument("--w-card", type=float)
        sp.add_argument("--config", help="FitConfig as JSON or key=value lines")
        sp.add_argument("--grad-check", action="store_true", help="compare gradients to finite differences first")
        sp.add_argument("--no-normalize", action="store_true", help="disable core likelihood normalization")

    def metric_opts(sp):
        sp.add_argument("--s-list", type=_int_list, default=list(DEFAULT_S_LIST))
        sp.add_argument("--hohe-rounds", type=int, default=DEFAULT_HOHE_ROUNDS)
        sp.add_argument("--top-k-sv", type=int, default=10)

    sp = sub.add_parser("partition", help="split nodes into core and fringe")
    common(sp, "out")
    sp.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("fit", help="fit model parameters to a hypergraph")
    common(sp, "out")
    fit_opts(sp)
    sp.add_argument("--model", choices=[NOAH, "noah-cf"], default=NOAH)
    sp.add_argument("--partition", help="core id file to use instead of a fresh partition")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("generate", help="sample a hypergraph")
    common(sp, "out")
    sp.add_argument("--model", choices=[NOAH, "noah-cf", HYPERCL], default=NOAH)
    sp.add_argument("--params", help="params.json written by 'fit'")
    sp.add_argument("--partition", help="core id file (default: core.txt next to --params)")
    sp.add_argument("-m", type=int, help="number of hyperedges (default: as many as --edges)")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("eval", help="interplay and structural measures of one hypergraph")
    common(sp, "out")
    metric_opts(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("compare", help="discrepancies between a real and a generated hypergraph")
    common(sp, "out")
    metric_opts(sp)
    sp.add_argument("--gen-edges", help="generated hyperedge list")
    sp.add_argument("--gen-attrs", help="generated attributes (default: --attrs)")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("bench", help="time fit and generation on duplicated data")
    common(sp, "out")
    fit_opts(sp)
    sp.add_argument("--factors", type=_int_list, default=[1, 2, 4, 8, 16, 32, 64])
    sp.set_defaults(func=cmd_bench, epochs=5)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    for name in ("rounds", "hohe_rounds", "top_k_sv", "m"):
        val = getattr(args, name, None)
        if val is not None and val < 1:
            print(f"error: --{name.replace('_', '-')} must be >= 1", file=sys.stderr)
            return 2
    try:
        args.func(args)
    except FitDivergedError as exc:
        print(f"error: fit diverged: {exc} (hyperedge index {exc.edge_index})", file=sys.stderr)
        return 1
    except (UsageError, HypergraphFormatError, FileNotFoundError, IsADirectoryError,
            json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level guard
        logger.debug("run failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
