"""Command-line entry point: ``fjbvp {solve,diagnose,scan,centrality,campaign,datasets}``.

Every command writes ``manifest.json`` holding the resolved options.  Passing
that file back through ``--config`` reruns the command with the same
settings.  The worker count is left out of the manifest because it never
changes the output bytes.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .broadcasting import CLASSICAL, CLOSENESS_METRICS, MEASURES, broadcasting_centralities, broadcasting_graph
from .broadcasting import centralization, classical_centralities
from .dynamics import diagnose, steady_state
from .errors import CapReached, FJError, NotWellPosed, ParseError
from .files import fmt, load_graph, load_problem, read_json, write_campaign, write_json, write_rows, write_scan
from .graph import DATASETS
from .influence import DEFAULT_EPSILON, DEFAULT_T_CAP, node_diagnostics, scan_all_vertices
from .montecarlo import CampaignConfig, run_campaign
from .sensitivity import all_gradients

OUTPUT_ENV = "FJBVP_OUTPUT_DIR"
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NOT_WELL_POSED = 4
EXIT_CAP = 5

#: Plumbing options; none of them changes the results.
_NOT_IN_MANIFEST = {"threads", "config", "out", "func"}


def _default_out() -> str:
    return os.environ.get(OUTPUT_ENV, "fjbvp-out")


def _label(system, i: int) -> str:
    return system.label(int(i))


# ---------------------------------------------------------------- commands


def cmd_solve(args) -> dict:
    problem = load_problem(args.problem)
    system = problem.system
    out = Path(args.out)
    wp = diagnose(problem)
    report = {
        "well_posed": wp.ok,
        "rho": wp.rho,
        "reachable": wp.reachable,
        "damped": wp.damped,
        "closed_classes": [[_label(system, i) for i in c] for c in wp.closed_classes],
        "undamped_cycles": [[_label(system, i) for i in c] for c in wp.undamped_cycles],
    }
    if not wp.ok:
        write_json(out / "steady_state.json", report)
        witness = wp.closed_classes[0] if wp.closed_classes else (wp.undamped_cycles or [[]])[0]
        names = "{" + ",".join(_label(system, i) for i in witness) + "}"
        raise NotWellPosed(f"not well posed (rho={fmt(wp.rho)}): undamped cycle {names}", wp.rho, witness)
    ss = steady_state(problem)
    full = ss.full(problem)
    report.update(residual=ss.residual, v_star={_label(system, i): full[i] for i in range(problem.n)})
    write_json(out / "steady_state.json", report)
    role = np.full(problem.n, "interior", dtype=object)
    role[problem.boundary] = "boundary"
    write_rows(
        out / "steady_state.csv",
        ["node", "label", "role", "value"],
        [[i, _label(system, i), role[i], full[i]] for i in range(problem.n)],
    )
    if args.sensitivity:
        rows = []
        for rep in all_gradients(problem):
            rows.append([rep.node, rep.scalar_factor, *rep.gradient])
        header = ["node", "scalar_factor", *(f"d_{_label(system, j)}" for j in problem.interior)]
        write_rows(out / "sensitivity.csv", header, rows)
    if args.spectrum:
        from .spectral import dirichlet_spectrum, spectrum_rows

        spec = dirichlet_spectrum(system, problem.interior)
        write_rows(out / "spectrum.csv", ["k", "lambda"], spectrum_rows(spec))
    return {"rho": ss.rho}


def cmd_diagnose(args) -> dict:
    problem = load_problem(args.problem)
    diag = node_diagnostics(problem, epsilon=args.epsilon, t_cap=args.t_cap)
    system = problem.system
    write_rows(
        Path(args.out) / "diagnostics.csv",
        ["node", "label", "kickoff", "germinated", "stabilization", "steady"],
        [
            [i, _label(system, i), diag.kickoff[i], diag.germinated[i], diag.stabilization[i], diag.steady[i]]
            for i in range(problem.n)
        ],
    )
    if diag.capped.any() and args.strict:
        raise CapReached(f"{int(diag.capped.sum())} node(s) did not stabilise within {args.t_cap} steps")
    return {"capped": int(diag.capped.sum())}


def _susceptibility(args, n: int) -> np.ndarray:
    if args.s_file:
        s = np.loadtxt(args.s_file, delimiter=",", ndmin=1).ravel()
        if s.size != n:
            raise ParseError(f"{args.s_file}: expected {n} susceptibilities, found {s.size}")
        return s
    return np.full(n, float(args.s))


def _graph(args):
    return load_graph(graph=args.graph, dataset=args.dataset, weights=args.weights, undirected=args.undirected)


def cmd_scan(args) -> dict:
    system = _graph(args)
    scan = scan_all_vertices(system, _susceptibility(args, system.n), epsilon=args.epsilon, t_cap=args.t_cap)
    write_scan(scan, args.out)
    if scan.stabilization_capped and args.strict:
        raise CapReached(f"{scan.stabilization_capped} entries did not stabilise within {args.t_cap} steps")
    return {"ill_posed_rows": int((~scan.well_posed).sum()), "capped": scan.stabilization_capped}


def cmd_centrality(args) -> dict:
    system = _graph(args)
    s = _susceptibility(args, system.n)
    scan = scan_all_vertices(system, s, epsilon=args.epsilon, responses_only=True)
    bg = broadcasting_graph(system, scan)
    ob = broadcasting_centralities(bg, args.eta, args.alpha, args.closeness)
    cl = classical_centralities(system, args.eta, args.alpha)
    write_rows(
        Path(args.out) / "centralities.csv",
        ["node", "label", *MEASURES, *CLASSICAL],
        [
            [i, _label(system, i), *(ob[m].values[i] for m in MEASURES), *(cl[c].values[i] for c in CLASSICAL)]
            for i in range(system.n)
        ],
    )
    cents = {m: centralization(ob[m].values) for m in MEASURES}
    write_json(Path(args.out) / "centralization.json", {k: fmt(v) for k, v in cents.items()})
    return {}


def _campaign_config(args) -> CampaignConfig:
    fields = CampaignConfig.__dataclass_fields__
    return CampaignConfig(**{k: getattr(args, k) for k in fields})


def cmd_campaign(args) -> dict:
    config = _campaign_config(args)
    result = run_campaign(None, config, threads=args.threads)
    write_campaign(result, args.out, bins=args.bins)
    return {"valid_runs": int(result.valid_runs.size)}


def cmd_datasets(args) -> dict:
    for name, desc in DATASETS.items():
        print(f"{name}\t{desc}")
    write_json(Path(args.out) / "datasets.json", DATASETS)
    return {}


# ------------------------------------------------------------------ parser


def _graph_options(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--dataset", choices=sorted(DATASETS), help="builtin dataset")
    g.add_argument("--graph", help="edge list file: 'i j [w]' per line")
    g.add_argument("--weights", help="dense row-stochastic CSV")
    p.add_argument("--undirected", action="store_true", help="symmetrise the edge list")
    g2 = p.add_mutually_exclusive_group()
    g2.add_argument("--s", type=float, default=0.5, help="homogeneous susceptibility")
    g2.add_argument("--s-file", help="CSV with one susceptibility per node")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fjbvp", description="Friedkin-Johnsen dynamics as a Dirichlet problem")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("-o", "--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or ./fjbvp-out)")
        p.add_argument("--config", help="JSON file of option values, e.g. a previous manifest.json")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes")
        return p

    p = add("solve", cmd_solve, "steady state and well-posedness of a problem file")
    p.add_argument("problem", nargs="?")
    p.add_argument("--sensitivity", action="store_true", help="also write d v*/d s_k for every interior k")
    p.add_argument("--spectrum", action="store_true", help="also write the Dirichlet spectrum (random-walk systems)")

    p = add("diagnose", cmd_diagnose, "kick-off, germinated opinion and stabilisation per node")
    p.add_argument("problem", nargs="?")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--t-cap", type=int, default=DEFAULT_T_CAP)
    p.add_argument("--strict", action="store_true", help="fail when a stabilisation time hits the cap")

    p = add("scan", cmd_scan, "all-vertex scan matrices")
    _graph_options(p)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--t-cap", type=int, default=DEFAULT_T_CAP)
    p.add_argument("--strict", action="store_true", help="fail when a stabilisation time hits the cap")

    p = add("centrality", cmd_centrality, "broadcasting and classical centralities")
    _graph_options(p)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--eta", type=float, default=CampaignConfig.eta)
    p.add_argument("--alpha", type=float, default=CampaignConfig.alpha)
    p.add_argument("--closeness", choices=CLOSENESS_METRICS, default="definition")

    p = add("campaign", cmd_campaign, "Monte Carlo campaign over random susceptibilities")
    defaults = CampaignConfig()
    for name in CampaignConfig.__dataclass_fields__:
        value = getattr(defaults, name)
        flag = "--" + name.replace("_", "-")
        if name == "closeness":
            p.add_argument(flag, choices=CLOSENESS_METRICS, default=value)
        elif name == "dataset":
            p.add_argument(flag, choices=sorted(DATASETS), default=value)
        else:
            p.add_argument(flag, type=type(value), default=value)
    p.add_argument("--bins", type=int, default=30, help="histogram bins")

    add("datasets", cmd_datasets, "list builtin datasets")
    return parser


def _apply_config(parser, argv):
    """Parse ``argv``; values from ``--config`` act as defaults that explicit flags override."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    data = read_json(args.config)
    if isinstance(data, dict) and "options" in data:
        data = data["options"]
    if not isinstance(data, dict):
        raise ParseError(f"{args.config}: expected a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(data) - known
    if unknown:
        raise ParseError(f"{args.config}: unknown options {sorted(unknown)}")
    sub.set_defaults(**data)
    return parser.parse_args(argv)


def manifest(args) -> dict:
    options = {k: v for k, v in vars(args).items() if k not in _NOT_IN_MANIFEST and k != "command"}
    return {"command": args.command, "version": __version__, "options": options}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.out is None:
            args.out = _default_out()
        if args.command in ("solve", "diagnose") and not args.problem:
            parser.error(f"{args.command}: a problem file is required")
        if args.threads < 1:
            parser.error("--threads must be >= 1")
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_json(Path(args.out) / "manifest.json", manifest(args))
        args.func(args)
    except ParseError as exc:
        print(f"fjbvp: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotWellPosed as exc:
        print(f"fjbvp: {exc}", file=sys.stderr)
        return EXIT_NOT_WELL_POSED
    except CapReached as exc:
        print(f"fjbvp: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (FJError, OSError) as exc:
        print(f"fjbvp: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
