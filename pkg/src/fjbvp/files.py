"""Problem files, CSV/JSON writers and minimal SVG charts.

Floats are written with 17 significant digits so reruns can be compared
byte for byte.  Infinite hop counts are written as the string ``inf``.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .broadcasting import CLASSICAL, MEASURES
from .dynamics import DirichletProblem, make_problem
from .errors import ParseError
from .graph import (
    UNREACHABLE,
    InfluenceSystem,
    build_system,
    load_dataset,
    random_walk_system,
    read_dense_csv,
    read_edge_list,
    system_from_edges,
)


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return "inf" if x == UNREACHABLE else str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def write_matrix(path, mat) -> Path:
    return write_rows(path, None, [list(r) for r in np.asarray(mat)])


def write_json(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else fmt(x)
    return x


def read_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


# ------------------------------------------------------------- problem files


def system_from_json(data: dict) -> InfluenceSystem:
    """Build a system from ``weights``, ``adjacency`` + ``random_walk``, ``dataset`` or ``edges``."""
    labels = data.get("labels")
    if "dataset" in data:
        return load_dataset(data["dataset"])
    if "weights" in data:
        return build_system(np.array(data["weights"], dtype=float), labels)
    if "adjacency" in data:
        if not data.get("random_walk", False):
            raise ParseError("'adjacency' requires \"random_walk\": true")
        return random_walk_system(np.array(data["adjacency"], dtype=float), labels)
    if "edges" in data:
        edges = data["edges"]
        n = 1 + max(max(int(e[0]), int(e[1])) for e in edges)
        raw = np.zeros((n, n))
        for e in edges:
            raw[int(e[0]), int(e[1])] += float(e[2]) if len(e) > 2 else 1.0
        return system_from_edges(raw, undirected=bool(data.get("undirected", False)))
    raise ParseError("problem needs one of 'weights', 'adjacency', 'dataset' or 'edges'")


def load_problem(path) -> DirichletProblem:
    data = read_json(path)
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    try:
        system = system_from_json(data)
        s = data["susceptibility"]
        if isinstance(s, (int, float)):
            s = np.full(system.n, float(s))
        return make_problem(system, s, data.get("psi", {}), data.get("phi", {}))
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{path}: {exc}") from None


def load_graph(graph: str | None = None, dataset: str | None = None, weights: str | None = None, undirected: bool = False) -> InfluenceSystem:
    if dataset:
        return load_dataset(dataset)
    if weights:
        return build_system(read_dense_csv(weights))
    if graph:
        return system_from_edges(read_edge_list(graph), undirected=undirected)
    raise ParseError("no graph given: use --dataset, --graph or --weights")


# ----------------------------------------------------------------- outputs


def write_scan(scan, outdir) -> list[Path]:
    out = Path(outdir)
    return [
        write_matrix(out / "U_inf.csv", scan.U_inf),
        write_matrix(out / "T.csv", scan.T),
        write_matrix(out / "E.csv", scan.E),
        write_matrix(out / "S_eps.csv", scan.S_eps),
    ]


def svg_bars(edges, counts, title: str, width: int = 480, height: int = 240) -> str:
    counts = np.asarray(counts)
    top = max(int(counts.max()), 1)
    pad = 30
    bw = (width - 2 * pad) / len(counts)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{pad}" y="18" font-size="12">{title}</text>',
    ]
    for k, c in enumerate(counts):
        h = (height - 2 * pad) * c / top
        parts.append(
            f'<rect x="{pad + k * bw:.2f}" y="{height - pad - h:.2f}" width="{bw * 0.9:.2f}" height="{h:.2f}" fill="steelblue"/>'
        )
    parts.append(f'<text x="{pad}" y="{height - 8}" font-size="10">{fmt(edges[0])}</text>')
    parts.append(f'<text x="{width - pad}" y="{height - 8}" font-size="10" text-anchor="end">{fmt(edges[-1])}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_scatter(x, y, slope: float, intercept: float, title: str, width: int = 360, height: int = 300) -> str:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    pad = 30
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(min(y.min(), slope * x0 + intercept, slope * x1 + intercept)), float(
        max(y.max(), slope * x0 + intercept, slope * x1 + intercept)
    )
    sx = lambda v: pad + (width - 2 * pad) * ((v - x0) / (x1 - x0) if x1 > x0 else 0.5)
    sy = lambda v: height - pad - (height - 2 * pad) * ((v - y0) / (y1 - y0) if y1 > y0 else 0.5)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{pad}" y="18" font-size="12">{title}</text>',
    ]
    for a, b in zip(x, y):
        parts.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3" fill="black"/>')
    parts.append(
        f'<line x1="{sx(x0):.2f}" y1="{sy(slope * x0 + intercept):.2f}" x2="{sx(x1):.2f}" '
        f'y2="{sy(slope * x1 + intercept):.2f}" stroke="firebrick"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_campaign(result, outdir, bins: int = 30) -> list[Path]:
    from .montecarlo import histogram, regression_line

    out = Path(outdir)
    n = result.nodewise_means.shape[1]
    written = [
        write_rows(
            out / "nodewise_means.csv",
            ["node", *MEASURES, *CLASSICAL],
            [[i, *result.nodewise_means[:, i], *result.classical[:, i]] for i in range(n)],
        ),
        write_rows(
            out / "correlations.csv",
            ["measure", "pearson", "spearman", "top5"],
            [[m, *(result.statistics[m][k] for k in ("pearson", "spearman", "top5"))] for m in MEASURES],
        ),
        write_rows(
            out / "centralizations.csv",
            ["run", *MEASURES],
            [[int(r), *result.centralization_samples[:, k]] for k, r in enumerate(result.valid_runs)],
        ),
    ]
    reg_rows = []
    for k, m in enumerate(MEASURES):
        edges, counts = histogram(result.centralization_samples[k], bins)
        written.append(
            write_rows(
                out / "histograms" / f"{m}.csv",
                ["left", "right", "count"],
                [[edges[b], edges[b + 1], int(counts[b])] for b in range(len(counts))],
            )
        )
        svg = out / "histograms" / f"{m}.svg"
        svg.write_text(svg_bars(edges, counts, f"centralization {m}"))
        written.append(svg)
        x, y = result.classical[k], result.nodewise_means[k]
        slope, intercept = regression_line(x, y) if np.ptp(x) > 0 else (float("nan"), float("nan"))
        reg_rows.append([m, CLASSICAL[k], slope, intercept])
        written.append(
            write_rows(out / "scatter" / f"{m}.csv", ["node", CLASSICAL[k], m], [[i, x[i], y[i]] for i in range(n)])
        )
        svg = out / "scatter" / f"{m}.svg"
        svg.write_text(svg_scatter(x, y, slope, intercept, f"{m} vs {CLASSICAL[k]}"))
        written.append(svg)
    written.append(write_rows(out / "scatter" / "regression.csv", ["measure", "classical", "slope", "intercept"], reg_rows))
    written.append(
        write_json(
            out / "summary.json",
            {
                "valid_runs": int(result.valid_runs.size),
                "ill_posed_runs": result.ill_posed_runs,
                "bound_violations": result.bound_violations,
                "statistics": result.statistics,
            },
        )
    )
    return written
