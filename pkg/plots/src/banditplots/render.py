"""Render experiment CSVs into the standard figure set.

Consumes exactly the harness CSV schemas and nothing else:

    bias-bars      bias.csv      arm,bias,se,ci_lo,ci_hi
    regret-curves  regret.csv    t,regret_mean,regret_se,policy
    pvalue-hist    pvalues.csv   rep,pvalue,zstat,arm_star

Rendering never writes to its inputs.  With timestamps suppressed, repeated
renders of the same spec are byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

KINDS = ("bias-bars", "regret-curves", "pvalue-hist")

REQUIRED_COLUMNS = {
    "bias-bars": ("arm", "bias", "se", "ci_lo", "ci_hi"),
    "regret-curves": ("t", "regret_mean", "regret_se", "policy"),
    "pvalue-hist": ("rep", "pvalue", "zstat", "arm_star"),
}

HIST_BIN_WIDTH = 0.025


class SchemaError(ValueError):
    """Input CSV does not match the required schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_csv: Path
    output_image: Path
    alpha: float = 0.05
    suppress_timestamps: bool = True
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {KINDS}")
        object.__setattr__(self, "input_csv", Path(self.input_csv))
        object.__setattr__(self, "output_image", Path(self.output_image))


def read_rows(path: Path, kind: str) -> list[dict[str, str]]:
    """Load and schema-check one CSV; missing columns are hard errors."""
    if not path.exists():
        raise SchemaError(f"input CSV not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS[kind] if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing columns {missing} for {kind} "
                f"(found {header})")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _save(fig, spec: FigureSpec):
    spec.output_image.parent.mkdir(parents=True, exist_ok=True)
    metadata = None
    rc = {}
    if spec.suppress_timestamps:
        rc["svg.hashsalt"] = "banditplots"  # deterministic SVG element ids
        suffix = spec.output_image.suffix.lower()
        if suffix == ".svg":
            metadata = {"Date": None}
        elif suffix == ".pdf":
            metadata = {"CreationDate": None}
    with matplotlib.rc_context(rc):
        fig.savefig(spec.output_image, dpi=150, metadata=metadata)
    plt.close(fig)


def _render_bias_bars(spec: FigureSpec):
    rows = read_rows(spec.input_csv, "bias-bars")
    arms = np.array([int(r["arm"]) for r in rows])
    bias = np.array([float(r["bias"]) for r in rows])
    ci_lo = np.array([float(r["ci_lo"]) for r in rows])
    ci_hi = np.array([float(r["ci_hi"]) for r in rows])
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(arms, bias, color="seagreen", edgecolor="black",
           yerr=np.vstack([bias - ci_lo, ci_hi - bias]), capsize=4)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("arm")
    ax.set_ylabel("bias")
    ax.set_title(spec.title or "bias per arm (95% CI)")
    fig.tight_layout()
    _save(fig, spec)


def _render_regret_curves(spec: FigureSpec):
    rows = read_rows(spec.input_csv, "regret-curves")
    by_policy: dict[str, list[tuple[int, float, float]]] = {}
    for r in rows:
        by_policy.setdefault(r["policy"], []).append(
            (int(r["t"]), float(r["regret_mean"]), float(r["regret_se"])))
    fig, ax = plt.subplots(figsize=(7, 4))
    for policy in sorted(by_policy):
        pts = sorted(by_policy[policy])
        t = np.array([p[0] for p in pts])
        mean = np.array([p[1] for p in pts])
        se = np.array([p[2] for p in pts])
        ax.plot(t, mean, label=policy)
        ax.fill_between(t, mean - 1.96 * se, mean + 1.96 * se, alpha=0.25)
    ax.set_xlabel("t")
    ax.set_ylabel("average cumulative regret")
    ax.set_title(spec.title or "regret over time")
    ax.legend()
    fig.tight_layout()
    _save(fig, spec)


def _render_pvalue_hist(spec: FigureSpec) -> float:
    rows = read_rows(spec.input_csv, "pvalue-hist")
    ps = np.array([float(r["pvalue"]) for r in rows])
    bad = ps[(ps < 0.0) | (ps > 1.0)]
    if bad.size:
        raise SchemaError(f"{spec.input_csv}: p-values outside [0, 1]: "
                          f"{bad[:5]}")
    mass_below = float(np.mean(ps < spec.alpha))
    edges = np.arange(0.0, 1.0 + HIST_BIN_WIDTH / 2, HIST_BIN_WIDTH)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(ps, bins=edges, color="steelblue", edgecolor="black")
    ax.axvline(spec.alpha, color="blue", linestyle="dotted",
               label=f"alpha = {spec.alpha:g}")
    ax.set_xlabel("p-value")
    ax.set_ylabel("count")
    ax.set_title(spec.title or "p-value histogram")
    ax.legend()
    fig.tight_layout()
    _save(fig, spec)
    print(f"mass below alpha={spec.alpha:g}: {mass_below:.10g} "
          f"({int((ps < spec.alpha).sum())} of {len(ps)})")
    return mass_below


def render(spec: FigureSpec):
    """Render one figure; returns the histogram's below-alpha mass, if any."""
    if spec.kind == "bias-bars":
        return _render_bias_bars(spec)
    if spec.kind == "regret-curves":
        return _render_regret_curves(spec)
    return _render_pvalue_hist(spec)
