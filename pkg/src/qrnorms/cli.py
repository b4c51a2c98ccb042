"""Batch experiment driver.

Every command builds a tower, runs one experiment and writes a table
(CSV or JSON).  Settings come from flags, optionally from a ``key=value``
config file (``--config``); flags win.  The exit status is 0 iff every
embedded check passed.

    qrnorms tower build --backend ag --levels 2
    qrnorms spectra norm --element "0.25*a+0.25*A+0.25*b+0.25*B" --levels 2
    qrnorms folner run --levels 2 --k auto
    qrnorms run folner --config exp.cfg
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import folner as fol
from . import geometry as geo
from . import quotients as quo
from . import sparse_norms as sn
from . import spectra as spc
from .words import averaging_element, kesten_norm, parse_element

EXPERIMENTS = ("tower-validate", "norms", "gap", "rho", "regular", "sparse", "deficiency",
               "folner", "interpolate", "alpha", "lift-check")

DEFAULTS = {
    "backend": "ag",
    "levels": 2,
    "unwind": None,
    "modulus": 3,
    "moduli": None,
    "path": None,
    "element": None,
    "gamma": None,
    "budget": None,
    "k": "auto",
    "seed": 0,
    "tol": 1e-9,
    "out": None,
    "format": "csv",
    "level": None,
    "radius": None,
    "strategy": "auto",
}

_INT_KEYS = {"levels", "modulus", "budget", "seed", "level", "radius"}
_FLOAT_KEYS = {"tol"}


class ConfigError(ValueError):
    pass


def read_config(path: str | Path) -> dict:
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        cfg[key] = value
    return cfg


def _coerce(cfg: dict) -> dict:
    out = dict(cfg)
    try:
        for key in _INT_KEYS:
            if out.get(key) is not None:
                out[key] = int(out[key])
        for key in _FLOAT_KEYS:
            if out.get(key) is not None:
                out[key] = float(out[key])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if out["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    return out


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return _coerce(cfg)


def _int_list(text: str | None):
    if text in (None, ""):
        return None
    return [None if t.strip() in ("all", "") else int(t) for t in str(text).split(",")]


def build_tower(cfg: dict) -> quo.QuotientTower:
    backend = cfg["backend"]
    if backend == "ag":
        return quo.ag_tower(cfg["levels"], _int_list(cfg["unwind"]))
    if backend == "sl2":
        if cfg["moduli"]:
            return quo.sl2_family([int(m) for m in str(cfg["moduli"]).split(",")])
        return quo.sl2_tower(cfg["modulus"], cfg["levels"])
    if backend == "file":
        if not cfg["path"]:
            raise ConfigError("file backend needs --path")
        paths = str(cfg["path"]).split(",")
        return quo.QuotientTower(tuple(quo.load_quotient(p, n) for n, p in enumerate(paths)), (),
                                 kind="family")
    raise ConfigError(f"unknown backend {backend!r}")


def _element(cfg):
    return parse_element(cfg["element"]) if cfg["element"] else averaging_element()


def _levels(cfg, tower):
    if cfg["level"] is None:
        return list(range(len(tower)))
    if not 0 <= cfg["level"] < len(tower):
        raise ConfigError(f"level {cfg['level']} not built (tower has {len(tower)} levels)")
    return [cfg["level"]]


# --------------------------------------------------------------------------
# experiments: each returns (rows, failures)


def exp_tower_validate(cfg, tower):
    rep = quo.tower_validate(tower)
    rows = [{"check": n, "passed": ok, "detail": d} for n, ok, d in rep.checks]
    sizes = [{"check": f"level {q.level}: size", "passed": True,
              "detail": f"nu={q.size}" + (" partial" if q.partial else "")
              + (f" r={q.graph.cotree_rank}" if q.graph is not None else "")}
             for q in tower.levels]
    return sizes + rows, [f"{n}: {d}" for n, d in rep.failures]


def exp_norms(cfg, tower):
    a, rows, fails = _element(cfg), [], []
    for n in _levels(cfg, tower):
        r = spc.op_norm(spc.assemble(a, tower[n]), cfg["tol"], seed=cfg["seed"])
        rows.append({"level": n, "quantity": "lambda_norm", "value": r.value, "residual": r.residual})
        if not r.converged:
            fails.append(f"level {n}: norm did not converge")
    return rows, fails


def exp_gap(cfg, tower):
    x, rows, fails = averaging_element(), [], []
    for n in _levels(cfg, tower):
        g = spc.spectral_gap(tower[n], x, cfg["tol"])
        rows.append({"level": n, "quantity": "degenerate_gap" if g.degenerate else "gap",
                     "value": g.delta, "residual": g.residual})
        if not g.converged or g.delta <= 0:
            fails.append(f"level {n}: gap {g.delta} (converged={g.converged})")
    return rows, fails


def exp_rho(cfg, tower):
    if tower.kind != "tower":
        raise ConfigError("rho needs a nested tower")
    a, rows, fails = _element(cfg), [], []
    for n in _levels(cfg, tower):
        if n == 0:
            continue
        M = spc.assemble(a, tower[n])
        rho = spc.rho_norm(a, tower[n], tower.link(n), cfg["tol"], seed=cfg["seed"])
        lam = spc.op_norm(M, cfg["tol"], seed=cfg["seed"])
        rows.append({"level": n, "quantity": "rho_norm", "value": rho.value, "residual": rho.residual})
        rows.append({"level": n, "quantity": "lambda_norm", "value": lam.value, "residual": lam.residual})
        if rho.value > lam.value + cfg["tol"]:
            fails.append(f"level {n}: rho norm exceeds lambda norm")
    return rows, fails


def exp_regular(cfg, tower):
    a, rows, fails = _element(cfg), [], []
    radii = [cfg["radius"]] if cfg["radius"] is not None else list(range(1, 9))
    prev = -math.inf
    for R in radii:
        r = spc.regular_norm(a, R, cfg["tol"])
        rows.append({"level": R, "quantity": "regular_norm", "value": r.value, "residual": r.residual})
        if r.value < prev - cfg["tol"]:
            fails.append(f"radius {R}: not monotone")
        if a == averaging_element() and r.value > kesten_norm() + 1e-9:
            fails.append(f"radius {R}: exceeds the Kesten norm")
        prev = r.value
    return rows, fails


def _budget(cfg, q):
    s = cfg["budget"] if cfg["budget"] is not None else math.ceil(math.sqrt(q.size))
    return min(max(s, 1), q.size)


def exp_sparse(cfg, tower):
    a, rows, fails = _element(cfg), [], []
    for n in _levels(cfg, tower):
        q = tower[n]
        M = spc.assemble(a, q)
        s = _budget(cfg, q)
        strategy = cfg["strategy"] if cfg["strategy"] in ("exhaustive", "power") else "auto"
        val, _ = sn.sparse_norm(M, s, strategy, seed=cfg["seed"])
        lam = spc.op_norm(M, cfg["tol"]).value
        col = sn.max_column_norm(M)
        rows.append({"level": n, "quantity": f"sparse_norm_s{s}", "value": val, "residual": 0.0})
        if not col - cfg["tol"] <= val <= lam + cfg["tol"]:
            fails.append(f"level {n}: sparse norm {val} outside [{col}, {lam}]")
    return rows, fails


def exp_deficiency(cfg, tower):
    x, rows, fails = averaging_element(), [], []
    for n in _levels(cfg, tower):
        q = tower[n]
        M = spc.assemble(x, q)
        s = _budget(cfg, q)
        strategy = cfg["strategy"]
        seeds = ()
        if strategy == "folner-seeded":
            fam = fol.build_A(tower, _ks(cfg, tower))
            seeds = [fam[n].points] if n >= 1 else [np.arange(q.size)]
            s = max(s, len(seeds[0]))
        val, _ = sn.min_invariance_deficiency(M, s, strategy, seeds)
        gap = spc.spectral_gap(q, x, cfg["tol"])
        bound = 0.0 if gap.degenerate else sn.tau_lower_bound(gap.delta, s, q.size)
        rows.append({"level": n, "quantity": f"min_deficiency_s{s}", "value": val, "residual": 0.0})
        rows.append({"level": n, "quantity": "tau_lower_bound", "value": bound, "residual": gap.residual})
        if val < bound - 1e-9:
            fails.append(f"level {n}: deficiency {val} below bound {bound}")
    return rows, fails


def _ks(cfg, tower):
    if cfg["k"] in (None, "auto"):
        return fol.choose_k(tower)
    return [int(t) for t in str(cfg["k"]).split(",")]


def exp_folner(cfg, tower):
    fam = fol.build_A(tower, _ks(cfg, tower))
    rows = fol.folner_report(fam, tower)
    fails = [f"level {r.level}: Følner checks failed" for r in rows if not r.ok]
    return [r.as_dict() for r in rows], fails


def exp_interpolate(cfg, tower):
    a = _element(cfg)
    if cfg["gamma"]:
        gamma = sn.GrowthFunction.load(cfg["gamma"])
    else:
        gamma = sn.GrowthFunction.minimal(len(tower))
    k = 1 if cfg["k"] in (None, "auto") else int(cfg["k"])
    radius = cfg["radius"] if cfg["radius"] is not None else 8
    rows = sn.norm_interpolation_report(a, tower, gamma, k, radius, cfg["tol"])
    fails = [f"level {r.level}: sparse norm exceeds lambda norm"
             for r in rows if r.sparse_norm > r.lambda_norm + cfg["tol"]]
    return [r.as_dict() for r in rows], fails


def exp_alpha(cfg, tower):
    rows, fails = [], []
    for n in _levels(cfg, tower):
        r = geo.alpha(tower[n])
        rows.append({"level": n, "quantity": "alpha", "value": r.value,
                     "witness": str(r.witness), "acts_trivially": r.acts_trivially})
        if r.value is not None and not r.acts_trivially:
            fails.append(f"level {n}: shortest relator does not act trivially")
    return rows, fails


def exp_lift_check(cfg, tower):
    rows, fails = [], []
    for n in _levels(cfg, tower):
        q = tower[n]
        al = geo.alpha(q).value
        radii = [cfg["radius"]] if cfg["radius"] is not None else \
            [R for R in range(0, 8) if al is not None and R < al / 4]
        for R in radii:
            rep = geo.check_isometric_lifting(q, R)
            rows.append({"level": n, "radius": R, "alpha": al, "passed": rep.passed,
                         "reason": rep.reason})
            if al is not None and R < al / 4 and not rep.passed:
                fails.append(f"level {n}: lifting fails at R={R} < alpha/4")
    return rows, fails


RUNNERS = {
    "tower-validate": exp_tower_validate,
    "norms": exp_norms,
    "gap": exp_gap,
    "rho": exp_rho,
    "regular": exp_regular,
    "sparse": exp_sparse,
    "deficiency": exp_deficiency,
    "folner": exp_folner,
    "interpolate": exp_interpolate,
    "alpha": exp_alpha,
    "lift-check": exp_lift_check,
}


# --------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render(rows: list[dict], cfg: dict, experiment: str) -> str:
    meta = {"experiment": experiment, "backend": cfg["backend"], "seed": cfg["seed"], "tol": cfg["tol"]}
    if cfg["format"] == "json":
        clean = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()}
                 for r in rows]
        return json.dumps({"meta": meta, "rows": clean}, indent=2, default=_cell) + "\n"
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    fields = list(rows[0]) if rows else []
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_cell(r.get(f)) for f in fields])
    return buf.getvalue()


def execute(experiment: str, cfg: dict, stdout=None) -> int:
    stdout = stdout or sys.stdout
    tower = build_tower(cfg)
    rows, fails = RUNNERS[experiment](cfg, tower)
    text = render(rows, cfg, experiment)
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    for f in fails:
        print(f"FAILED: {f}", file=sys.stderr)
    return 1 if fails else 0


# --------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--backend", choices=("ag", "sl2", "file"))
    p.add_argument("--levels", type=int, help="number of levels above level 0")
    p.add_argument("--unwind", help="comma list of unwind sizes per level ('all' for full)")
    p.add_argument("--modulus", type=int, help="prime for the sl2 tower p, p^2, ...")
    p.add_argument("--moduli", help="comma list of moduli for a non-nested sl2 family")
    p.add_argument("--path", help="permutation file(s), comma separated")
    p.add_argument("--element", help="group-algebra element, e.g. '0.5*a + 0.5*B'")
    p.add_argument("--gamma", help="growth-function file, one integer per line")
    p.add_argument("--budget", type=int)
    p.add_argument("--k")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--level", type=int)
    p.add_argument("--radius", type=int)
    p.add_argument("--strategy", choices=("auto", "exhaustive", "power", "greedy", "folner-seeded"))


# (group, command) -> experiment
COMMANDS = {
    ("tower", "build"): "tower-validate",
    ("geometry", "alpha"): "alpha",
    ("geometry", "lift-check"): "lift-check",
    ("spectra", "norm"): "norms",
    ("spectra", "gap"): "gap",
    ("spectra", "rho"): "rho",
    ("spectra", "regular"): "regular",
    ("sparse", "norm"): "sparse",
    ("sparse", "deficiency"): "deficiency",
    ("report", "interpolate"): "interpolate",
    ("folner", "run"): "folner",
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrnorms", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="group", required=True)
    run = sub.add_parser("run", help="run a named experiment")
    run.add_argument("experiment", choices=EXPERIMENTS)
    _add_common(run)
    groups: dict[str, argparse._SubParsersAction] = {}
    for group, command in COMMANDS:
        if group not in groups:
            groups[group] = sub.add_parser(group).add_subparsers(dest="command", required=True)
        _add_common(groups[group].add_parser(command))
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    experiment = args.experiment if args.group == "run" else COMMANDS[(args.group, args.command)]
    try:
        cfg = resolve(args)
        return execute(experiment, cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
