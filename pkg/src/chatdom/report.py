"""Deterministic rendering of results: delimited text, JSON and figures."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SIG_DIGITS = 6

plt.rcParams.update({
    "svg.hashsalt": "chatdom",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
})


def fmt(value):
    """Fixed 6-significant-digit text for floats; other values pass through."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return format(value, f".{SIG_DIGITS}g")
    return value


def _round(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(format(obj, f".{SIG_DIGITS}g"))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def to_json(obj) -> str:
    return json.dumps(_round(obj), indent=2, ensure_ascii=False) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def corpus_stats_rows(stats) -> tuple[list[str], list[list]]:
    header = ["group_id", "comment_count", "char_length_total", "word_count_total"]
    rows = [[g.group_id, g.comment_count, g.char_length_total, g.word_count_total] for g in stats.groups]
    for label, attr in (("TOTAL", "total"), ("MEAN", "mean"), ("SD", "sd"), ("MIN", "min"), ("MAX", "max")):
        rows.append([label, *(getattr(s, attr) for s in (stats.comments, stats.length, stats.words))])
    return header, rows


def coefficient_rows(name: str, model) -> list[list]:
    return [[name, r["parameter"], r["estimate"], r["std_error"], r["chi_square"], r["p_value"], r["stars"]]
            for r in model.table()]


COEFFICIENT_HEADER = ["model", "parameter", "estimate", "std_error", "chi_square", "p_value", "stars"]


def format_model_table(name: str, model) -> str:
    """Plain-text coefficient table in the layout of a published logit table."""
    lines = [f"{name}", f"{'Parameter':<22}{'Est.':>10}{'Std. Error':>12}{'Chi-Square':>12}"]
    for r in model.table():
        lines.append(f"{r['parameter']:<22}{r['estimate']:>10.4g}{r['std_error']:>12.4g}"
                     f"{r['chi_square']:>12.2f} {r['stars']}")
    lines.append(f"Residual Dev {model.residual_deviance:.2f}")
    lines.append(f"AIC: {model.aic:.2f}")
    if not model.converged:
        lines.append(f"WARNING: not converged. {model.message}")
    return "\n".join(lines) + "\n"


def share_figure(report, title: str = "Share of dominance comments with mean + 1 SD threshold"):
    """Bar chart of every participant's ED share, grouped by group, with the threshold line."""
    parts = report.participants
    groups = list(dict.fromkeys(p.group_id for p in parts))
    width = max(6.0, 0.18 * len(parts) + 1.5)
    fig, ax = plt.subplots(figsize=(width, 3.6))
    x = 0
    ticks, labels = [], []
    cmap = plt.get_cmap("tab10")
    for gi, g in enumerate(groups):
        members = [p for p in parts if p.group_id == g]
        xs = list(range(x, x + len(members)))
        colors = [cmap(gi % 10)] * len(members)
        bars = ax.bar(xs, [100 * p.share for p in members], color=colors, width=0.8)
        for b, p in zip(bars, members):
            if p.dominant:
                b.set_edgecolor("black")
                b.set_linewidth(1.2)
        ticks.append((xs[0] + xs[-1]) / 2)
        labels.append(g)
        x += len(members) + 1
    ax.axhline(100 * report.threshold, color="crimson", linestyle="--", linewidth=1,
               label=f"mean + 1 SD = {100 * report.threshold:.1f}%")
    ax.axhline(100 * report.corpus_mean_share, color="grey", linestyle=":", linewidth=1,
               label=f"mean = {100 * report.corpus_mean_share:.1f}%")
    ax.set_xticks(ticks)
    ax.set_xticklabels(labels)
    ax.set_ylabel("% of group ED comments")
    ax.set_title(title)
    ax.legend(frameon=False, loc="upper right")
    fig.tight_layout()
    return fig


def figure_bytes(fig, format: str = "svg") -> bytes:
    buf = io.BytesIO()
    meta = {"Date": None} if format == "svg" else {"Software": None} if format == "png" else None
    fig.savefig(buf, format=format, metadata=meta)
    plt.close(fig)
    return buf.getvalue()
