"""``sawtree`` command line.

Exit codes: 0 success, 2 budget exceeded, 3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import __version__
from .errors import BudgetExceeded, InvalidInput, RefinementExhausted

EXIT_OK, EXIT_BUDGET, EXIT_INVALID = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _open_out(path):
    if path in (None, "-"):
        return _Stdout()
    return open(path, "w", encoding="utf-8", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _write_csv(path, header, rows):
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, obj):
    with _open_out(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _kv(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise InvalidInput(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _pairs(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise InvalidInput(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


# --- subcommands ----------------------------------------------------------------


def cmd_enumerate(a):
    from .lattice import DomainSpec
    from .saw_tree import as_tree

    tree = as_tree(DomainSpec.parse(a.domain), a.pruned)
    try:
        counts = tree.level_counts(a.max_depth, a.budget)
    except BudgetExceeded as e:
        _write_csv(a.out, ["n", "count"], list(enumerate(e.partial or [])))
        raise
    _write_csv(a.out, ["n", "count"], list(enumerate(counts)))


def cmd_counts(a):
    from . import combinatorics as cb
    from .lattice import DomainSpec

    kind = a.kind.lower()
    dom = DomainSpec.parse(a.domain)
    if kind == "saw":
        run = lambda: cb.count_walks(dom, a.max_n, a.budget)  # noqa: E731
    elif kind == "bridge":
        run = lambda: cb.count_bridges(dom, a.max_n, a.budget)  # noqa: E731
    elif kind.startswith("strip:"):
        run = lambda: cb.count_bridges(DomainSpec.parse(kind), a.max_n, a.budget)  # noqa: E731
    elif kind == "irreducible":
        run = lambda: cb.count_irreducible(a.max_n, a.budget)  # noqa: E731
    elif kind.startswith("through:"):
        run = lambda: cb.irreducible_through(kind.split(":", 1)[1], a.max_n, a.budget)  # noqa: E731
    else:
        raise InvalidInput(f"unknown kind {a.kind!r}")
    try:
        table = run()
    except BudgetExceeded as e:
        if e.partial is not None:
            _write_csv(a.out, ["n", "count"], e.partial.rows())
        raise
    _write_csv(a.out, ["n", "count"], table.rows())


def cmd_conductance(a):
    from .conductance import conductance_interval, escape_probability_mc, root_weight
    from .gallery import parse_tree_spec
    from .trees import as_fraction

    tree = parse_tree_spec(a.tree)
    lam = as_fraction(a.lam)
    iv = conductance_interval(tree, lam, a.level, closed_form=a.closed_form)
    out = {
        "lower": float(iv.lower),
        "upper": float(iv.upper),
        "level": a.level,
        "lambda": a.lam,
        "method": sorted(iv.method),
        "dead_end": iv.dead_end,
        "mc_mean": None,
        "mc_stderr": None,
    }
    if a.mc:
        opts = _kv(a.mc)
        est = escape_probability_mc(tree, lam, a.level, int(opts.get("samples", 10000)),
                                    int(opts.get("seed", 0)))
        pi = float(root_weight(tree, lam))
        out.update(mc_mean=est.mean, mc_stderr=est.stderr, mc_samples=est.samples,
                   mc_seed=est.seed, mc_conductance=pi * est.mean)
    _write_json(a.out, out)


def _committed_levels(depths, margin):
    """Levels d >= 1 whose last visit is followed by a visit to depth d + margin."""
    last = {}
    for i, d in enumerate(depths):
        last[d] = i
    sufmax = [0] * len(depths)
    m = -1
    for i in range(len(depths) - 1, -1, -1):
        m = max(m, depths[i])
        sufmax[i] = m
    return sum(1 for d, i in last.items() if d >= 1 and sufmax[i] >= d + margin)


def cmd_walk(a):
    from .gallery import parse_tree_spec
    from .lattice import DomainSpec
    from .rng import UniformStream
    from .saw_tree import SawTree, as_tree
    from .svg import render_svg
    from .walks import DEFAULT_COMMIT_MARGIN, line_visit_count, simulate

    if a.tree:
        tree = parse_tree_spec(a.tree)
    else:
        tree = as_tree(DomainSpec.parse(a.domain), a.pruned)
    lam = float("inf") if a.lam.lower() in ("inf", "infinity") else float(a.lam)
    trace = simulate(tree, lam, a.steps, UniformStream(a.seed, "walk"))
    stats = {
        "steps": trace.steps,
        "stuck": trace.stuck,
        "max_depth": trace.max_depth,
        "final_depth": trace.depths[-1],
        "seed": a.seed,
        "commit_margin": DEFAULT_COMMIT_MARGIN,
        "commit_events": _committed_levels(trace.depths, DEFAULT_COMMIT_MARGIN),
        "line_visit_count": line_visit_count(trace) if trace.heads else None,
    }
    if a.svg:
        if not isinstance(tree, SawTree):
            raise InvalidInput("--svg needs a lattice walk tree")
        with open(a.svg, "w", encoding="utf-8") as fh:
            fh.write(render_svg(tree.walk(trace.final)))
    _write_json(a.stats, stats)


def cmd_gallery(a):
    from .gallery import PeriodicTree, parse_tree_spec, periodic_critical_lambda
    from .trees import growth_estimate

    tree = parse_tree_spec(a.tree)
    reports = {r.strip() for r in a.report.split(",") if r.strip()}
    unknown = reports - {"levels", "growth", "degrees"}
    if unknown:
        raise InvalidInput(f"unknown report {sorted(unknown)}")
    counts = tree.level_counts(a.max_n, a.budget)
    header = ["n"]
    if "levels" in reports:
        header.append("size")
    if "degrees" in reports and tree.profile is not None:
        header.append("child_count")
    if "growth" in reports:
        header.append("growth")
    growth = dict(enumerate(growth_estimate(tree, a.max_n, a.budget), 1))
    rows = []
    for n in range(a.max_n + 1):
        row = [n]
        if "levels" in reports:
            row.append(counts[n])
        if "degrees" in reports and tree.profile is not None:
            row.append(tree.profile.child_count(n) if n >= 1 else "")
        if "growth" in reports:
            row.append(repr(growth[n][1]) if n >= 1 else "")
        rows.append(row)
    _write_csv(a.out, header, rows)
    if isinstance(tree, PeriodicTree):
        print(f"# critical lambda {periodic_critical_lambda(tree.base)!r}", file=sys.stderr)


def cmd_kesten(a):
    from .combinatorics import is_bridge, kesten_config, kesten_sample
    from .svg import render_svg

    cfg = kesten_config(a.beta, a.mmax)
    w = kesten_sample(cfg, a.blocks, a.seed)
    if a.svg:
        with open(a.svg, "w", encoding="utf-8") as fh:
            fh.write(render_svg(w))
    _write_json(a.out, {"beta": cfg.beta, "m_max": cfg.m_max, "Z": cfg.Z,
                        "blocks": a.blocks, "seed": a.seed, "length": len(w),
                        "moves": w.moves(), "is_bridge": is_bridge(w) if len(w) else None})


def cmd_lambda_m(a):
    from .combinatorics import critical_lambda_m, phi_critical_vector

    lam = critical_lambda_m(a.m)
    _write_json(a.out, {"m": a.m, "lambda_m": lam, "phi": phi_critical_vector(a.m)})


def cmd_experiment(a):
    from .experiments import DEFAULTS, load_config, make_config, rerun, run_experiment

    if a.action == "list":
        for name in sorted(DEFAULTS):
            print(name)
        return
    if a.action == "run":
        if a.config and a.id:
            raise InvalidInput("give a config file or --id, not both")
        if a.config:
            cfg = load_config(a.config)
        elif a.id:
            cfg = make_config(a.id, _pairs(a.set or []))
        else:
            raise InvalidInput("run needs a config file or --id")
        report = run_experiment(cfg, a.out)
    else:
        if not a.config:
            raise InvalidInput("rerun needs a report.json path")
        report = rerun(a.config, a.out)
    report.pop("files", None)
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sawtree", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("enumerate", help="level counts of a self-avoiding tree")
    s.add_argument("--domain", required=True)
    s.add_argument("--pruned", action="store_true")
    s.add_argument("--max-depth", type=int, required=True)
    s.add_argument("--budget", type=int)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("counts", help="walk, bridge and irreducible bridge counts")
    s.add_argument("--kind", required=True,
                   help="saw | bridge | irreducible | strip:<L> | through:E|N|S")
    s.add_argument("--domain", default="plane")
    s.add_argument("--max-n", type=int, required=True)
    s.add_argument("--budget", type=int)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_counts)

    s = sub.add_parser("conductance", help="conductance interval and Monte Carlo check")
    s.add_argument("--tree", required=True)
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--mc", help="samples=K,seed=S")
    s.add_argument("--closed-form", action="store_true",
                   help="use spherically symmetric tail bounds for the lower side")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_conductance)

    s = sub.add_parser("walk", help="simulate the biased walk")
    s.add_argument("--domain", default="halfplane")
    s.add_argument("--pruned", action="store_true")
    s.add_argument("--tree", help="tree spec instead of a lattice domain")
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--svg")
    s.add_argument("--stats", default="-")
    s.set_defaults(func=cmd_walk)

    s = sub.add_parser("gallery", help="level sizes and growth of example trees")
    s.add_argument("--tree", required=True)
    s.add_argument("--report", default="levels,growth")
    s.add_argument("--max-n", type=int, default=20)
    s.add_argument("--budget", type=int)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_gallery)

    s = sub.add_parser("kesten", help="sample from the truncated Kesten measure")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--mmax", type=int, required=True)
    s.add_argument("--blocks", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--svg")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_kesten)

    s = sub.add_parser("lambda-m", help="critical bias of the m-good tree")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_lambda_m)

    s = sub.add_parser("experiment", help="run, rerun or list experiment recipes")
    s.add_argument("action", choices=["run", "rerun", "list"])
    s.add_argument("config", nargs="?", help="config file (run) or report.json (rerun)")
    s.add_argument("--id", help="experiment id when no config file is given")
    s.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="parameter override with --id; repeatable")
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except BudgetExceeded as e:
        print(f"sawtree: budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except RefinementExhausted as e:
        print(f"sawtree: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidInput, ValueError, OSError) as e:
        print(f"sawtree: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
