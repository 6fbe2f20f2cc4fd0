"""Reproducible experiment recipes.

A config is a flat ``key = value`` text file (``#`` starts a comment).  The
``experiment`` key picks the recipe; every other key is a parameter with a
documented default.  Each run writes its data files plus ``report.json``
holding the fully resolved parameters, their sha256 hash, the seed and the
package version.  :func:`rerun` reads a report back and regenerates the
same bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import statistics
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .combinatorics import SELECTORS, critical_lambda_m, irreducible_table, mu_bracket
from .conductance import conductance_interval
from .errors import InvalidInput
from .gallery import parse_tree_spec
from .lattice import DomainSpec
from .rng import UniformStream
from .saw_tree import as_tree
from .svg import render_svg
from .trees import as_fraction
from .walks import line_visit_profile, simulate

DEFAULTS = {
    "continuity-scan": {
        "tree": "binary",
        "lambda_min": "0.6",
        "lambda_max": "2.0",
        "lambda_step": "0.02",
        "level": "40",
        "closed_form": "false",
    },
    "discontinuity-demo": {
        "tree": "join[prop5:x=7/5|prop5bar:x=5/4]",
        "control": "prop5:x=7/5",
        "lambda_jump": "4/5",
        "eps": "0.05,0.02,0.01,0.005",
        "levels": "500,1000,2000,4000,8000,16000,32000",
        "tol": "1e-9",
    },
    "frontispiece": {
        "domain": "upperhalfplane",
        "pruned": "true",
        "lambda": "1",
        "steps": "10000",
        "seed": "1",
    },
    "line-return": {
        "domain": "halfplane",
        "pruned": "true",
        "lambda": "1",
        "runs": "200",
        "steps": "10000",
        "checkpoints": "1000,10000",
        "seed": "7",
    },
    "lambda-m": {"m_max": "10", "mu_n": "12"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict

    def canonical(self) -> str:
        lines = [f"experiment = {self.experiment}"]
        lines += [f"{k} = {self.params[k]}" for k in sorted(self.params)]
        return "\n".join(lines) + "\n"

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def parse_config(text: str) -> ExperimentConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"config line {lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in raw:
            raise InvalidInput(f"config line {lineno}: duplicate key {k!r}")
        raw[k] = v
    return make_config(raw.pop("experiment", None), raw)


def make_config(experiment, params=None) -> ExperimentConfig:
    """Fill defaults; unknown ids and unknown keys are rejected."""
    if experiment not in DEFAULTS:
        raise InvalidInput(
            f"unknown experiment {experiment!r}; choose from {', '.join(sorted(DEFAULTS))}"
        )
    params = dict(params or {})
    extra = set(params) - set(DEFAULTS[experiment])
    if extra:
        raise InvalidInput(f"unknown keys for {experiment}: {', '.join(sorted(extra))}")
    merged = dict(DEFAULTS[experiment])
    merged.update({k: str(v) for k, v in params.items()})
    return ExperimentConfig(experiment, merged)


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# --- helpers -----------------------------------------------------------------


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise InvalidInput(f"not a boolean: {v!r}")


def _int_list(v: str) -> list[int]:
    try:
        return [int(s) for s in v.split(",") if s.strip()]
    except ValueError:
        raise InvalidInput(f"not a list of integers: {v!r}") from None


def _frac_list(v: str) -> list[Fraction]:
    return [as_fraction(s) for s in v.split(",") if s.strip()]


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x) -> str:
    """Stable text for numbers in data files."""
    if isinstance(x, Fraction):
        x = float(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _grid(lo: Fraction, hi: Fraction, step: Fraction) -> list[Fraction]:
    if step <= 0 or hi < lo:
        raise InvalidInput("bad grid bounds")
    n = int((hi - lo) / step)
    return [lo + i * step for i in range(n + 1)]


# --- recipes -----------------------------------------------------------------


def _continuity_scan(p):
    tree_spec = p["tree"]
    level = int(p["level"])
    closed = _bool(p["closed_form"])
    grid = _grid(as_fraction(p["lambda_min"]), as_fraction(p["lambda_max"]),
                 as_fraction(p["lambda_step"]))
    rows = []
    uppers = []
    for lam in grid:
        tree = parse_tree_spec(tree_spec)
        iv = conductance_interval(tree, lam, level, closed_form=closed)
        rows.append([_num(lam), _num(iv.lower), _num(iv.upper)])
        uppers.append(float(iv.upper))
    jumps = [abs(b - a) for a, b in zip(uppers, uppers[1:])]
    summary = {
        "points": len(grid),
        "max_adjacent_change": max(jumps) if jumps else 0.0,
        "classification": "diagnostic",
    }
    files = {"scan.csv": _csv(["lambda", "lower", "upper"], rows)}
    return files, summary


def _converged_interval(tree_spec, lam, levels, tol):
    """Interval at the first level where another doubling changes nothing."""
    prev = None
    for n in levels:
        iv = conductance_interval(parse_tree_spec(tree_spec), lam, n,
                                  exact=False, closed_form=True)
        if prev is not None and abs(iv.upper - prev.upper) <= tol \
                and abs(iv.lower - prev.lower) <= tol:
            return iv
        prev = iv
    return prev


def _discontinuity_demo(p):
    lam0 = as_fraction(p["lambda_jump"])
    levels = _int_list(p["levels"])
    tol = float(p["tol"])
    rows = []
    gaps = []
    for eps in _frac_list(p["eps"]):
        lo_side = lam0 - eps
        hi_side = lam0 + eps
        below = _converged_interval(p["tree"], lo_side, levels, tol)
        above = _converged_interval(p["tree"], hi_side, levels, tol)
        c_below = _converged_interval(p["control"], lo_side, levels, tol)
        c_above = _converged_interval(p["control"], hi_side, levels, tol)
        gap = above.lower - below.upper
        control_change = c_above.upper - c_below.lower
        gaps.append((eps, gap, control_change))
        rows.append([
            _num(eps), _num(lo_side), _num(below.upper), below.truncation_level,
            _num(hi_side), _num(above.lower), above.truncation_level,
            _num(gap), _num(control_change),
        ])
    certified = [g for _, g, _ in gaps if g > 0]
    summary = {
        "separated_at_some_eps": bool(certified),
        "gap_at_smallest_eps": gaps[-1][1] if gaps else None,
        "control_change_bound_at_smallest_eps": gaps[-1][2] if gaps else None,
        "note": "gap = lower(lambda+eps) - upper(lambda-eps); the control bound is "
                "upper(lambda+eps) - lower(lambda-eps) for the first branch alone",
    }
    header = ["eps", "lambda_minus", "upper_minus", "level_minus", "lambda_plus",
              "lower_plus", "level_plus", "gap", "control_change_bound"]
    return {"gaps.csv": _csv(header, rows)}, summary


def _frontispiece(p):
    domain = DomainSpec.parse(p["domain"])
    tree = as_tree(domain, _bool(p["pruned"]))
    seed = int(p["seed"])
    trace = simulate(tree, float(as_fraction(p["lambda"])), int(p["steps"]),
                     UniformStream(seed, "frontispiece"))
    walk = tree.walk(trace.final)
    svg = render_svg(walk, title=f"biased walk on {domain}, lambda={p['lambda']}")
    summary = {
        "final_depth": trace.depths[-1],
        "max_depth": trace.max_depth,
        "polyline_points": len(walk.points),
        "seed": seed,
    }
    path_csv = _csv(["i", "x", "y"], [[i, x, y] for i, (x, y) in enumerate(walk.points)])
    return {"frontispiece.svg": svg, "walk.csv": path_csv}, summary


def _line_return(p):
    domain = DomainSpec.parse(p["domain"])
    pruned = _bool(p["pruned"])
    lam = float(as_fraction(p["lambda"]))
    runs, steps = int(p["runs"]), int(p["steps"])
    checkpoints = sorted(_int_list(p["checkpoints"]))
    seed = int(p["seed"])
    rows = []
    per_cp = [[] for _ in checkpoints]
    for r in range(runs):
        tree = as_tree(domain, pruned)
        trace = simulate(tree, lam, steps, UniformStream(seed, f"line-return/{r}"))
        prof = line_visit_profile(trace, checkpoints)
        for j, c in enumerate(prof):
            per_cp[j].append(c)
        rows.append([r] + prof + [trace.max_depth])
    medians = [statistics.median(v) for v in per_cp]
    summary = {
        "runs": runs,
        "checkpoints": checkpoints,
        "medians": medians,
        "fraction_with_visit": sum(1 for v in per_cp[-1] if v >= 1) / runs,
        "median_increasing": all(a < b for a, b in zip(medians, medians[1:])),
    }
    header = ["run"] + [f"visits_at_{c}" for c in checkpoints] + ["max_depth"]
    return {"line_visits.csv": _csv(header, rows)}, summary


def _lambda_m(p):
    m_max = int(p["m_max"])
    mu_n = int(p["mu_n"])
    lo, hi = mu_bracket(mu_n)
    table = irreducible_table(m_max)
    rows = []
    for m in range(1, m_max + 1):
        lam = critical_lambda_m(m)
        phis = [math.fsum(table.by_selector[s][n] * lam**n for n in range(1, m + 1))
                for s in SELECTORS]
        rows.append([m, _num(lam)] + [_num(v) for v in phis] + [_num(math.fsum(phis))])
    summary = {"mu_bracket": [lo, hi], "inverse_mu_hi": 1 / hi,
               "p_n": table.counts[1:]}
    header = ["m", "lambda_m"] + [f"phi_{s}" for s in SELECTORS] + ["phi_sum"]
    return {"lambda_m.csv": _csv(header, rows)}, summary


RECIPES = {
    "continuity-scan": _continuity_scan,
    "discontinuity-demo": _discontinuity_demo,
    "frontispiece": _frontispiece,
    "line-return": _line_return,
    "lambda-m": _lambda_m,
}


def run_experiment(config: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Run a recipe; write data files and report.json when ``out_dir`` is set."""
    files, summary = RECIPES[config.experiment](config.params)
    report = {
        "experiment": config.experiment,
        "config": config.params,
        "config_hash": config.hash,
        "seed": int(config.params["seed"]) if "seed" in config.params else None,
        "version": __version__,
        "outputs": {name: hashlib.sha256(data.encode("utf-8")).hexdigest()
                    for name, data in sorted(files.items())},
        "summary": summary,
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name, data in files.items():
            with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(data)
        with open(os.path.join(out_dir, "config.txt"), "w", encoding="utf-8") as fh:
            fh.write(config.canonical())
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    report["files"] = files
    return report


def config_from_report(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        rep = json.load(fh)
    cfg = make_config(rep["experiment"], rep["config"])
    if cfg.hash != rep.get("config_hash"):
        raise InvalidInput("report config does not match its recorded hash")
    return cfg


def rerun(report_path: str, out_dir: str | None = None) -> dict:
    return run_experiment(config_from_report(report_path), out_dir)
