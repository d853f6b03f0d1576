"""Figure and delimited-output rendering for session reports, random-index
curves, and weight vectors. Figures land next to the TSV files so a report
directory is self-contained."""

from __future__ import annotations

import os
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .inconsistency import BUILTIN_RI, RiQueryPolicy, ri_approx, ri_lookup


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def write_tsv(path: str, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join("" if v is None else (f"{v:.10g}" if isinstance(v, float) else str(v))
                               for v in row) + "\n")


def render_cr_history(report: dict, out_dir: str, stem: str = "cr_history") -> dict:
    """Both consistency-ratio series as TSV plus a two-line chart with the
    0.1 acceptance threshold marked."""
    _ensure_dir(out_dir)
    rows = []
    for rec in report["cr_history"]:
        rows.append((rec["answered_count"], int(rec["connected"]), rec["ci"],
                     rec["ri_nm"], rec["cr_generalized"], rec["cr_naive"]))
    tsv = os.path.join(out_dir, f"{stem}.tsv")
    write_tsv(tsv, ["answered", "connected", "ci", "ri_nm", "cr_generalized", "cr_naive"], rows)

    gen = report["series"]["generalized"]
    nai = report["series"]["naive"]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if nai:
        ax.plot([p[0] for p in nai], [p[1] for p in nai], "o-", color="tab:red",
                label="CR against the complete-matrix random index")
    if gen:
        ax.plot([p[0] for p in gen], [p[1] for p in gen], "*--", color="tab:blue",
                label="CR against the missing-adjusted random index")
    ax.axhline(report.get("threshold", 0.1), color="gray", lw=1, ls=":", label="0.1 acceptance threshold")
    ax.set_xlabel("number of answered comparisons")
    ax.set_ylabel("consistency ratio")
    ax.legend(fontsize=8)
    ax.grid(axis="y", alpha=0.4)
    fig.tight_layout()
    png = os.path.join(out_dir, f"{stem}.png")
    fig.savefig(png, dpi=150)
    plt.close(fig)
    return {"tsv": tsv, "png": png}


def render_weights(weights_doc: dict, labels: list, out_dir: str, stem: str = "weights") -> dict:
    _ensure_dir(out_dir)
    values = weights_doc["weights"]
    tsv = os.path.join(out_dir, f"{stem}.tsv")
    write_tsv(tsv, ["label", "weight"], list(zip(labels, map(float, values))))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(values)), values, color="tab:blue")
    ax.set_xticks(range(len(values)), labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(f"weight ({weights_doc['gauge']})")
    fig.tight_layout()
    png = os.path.join(out_dir, f"{stem}.png")
    fig.savefig(png, dpi=150)
    plt.close(fig)
    return {"tsv": tsv, "png": png}


def render_ri_curve(n: int, out_dir: str, stem: Optional[str] = None,
                    simulate_samples: int = 0, seed: int = 0) -> dict:
    """Random index against the number of missing entries: table values, the
    linear approximation, and optionally fresh simulation."""
    _ensure_dir(out_dir)
    stem = stem or f"ri_n{n}"
    max_m = (n - 1) * (n - 2) // 2
    ms = list(range(max_m + 1))
    table_vals, approx_vals, sim_vals = [], [], []
    for m in ms:
        cell = BUILTIN_RI.cell(n, m)
        table_vals.append(cell.mean if cell else None)
        approx_vals.append(ri_approx(n, m))
        if simulate_samples:
            value, _src = ri_lookup(n, m, RiQueryPolicy.simulate_if_missing(simulate_samples, seed))
            sim_vals.append(value)
        else:
            sim_vals.append(None)
    rows = list(zip(ms, table_vals, approx_vals, sim_vals))
    tsv = os.path.join(out_dir, f"{stem}.tsv")
    write_tsv(tsv, ["m", "table", "approx", "simulated"], rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    known = [(m, v) for m, v in zip(ms, table_vals) if v is not None]
    if known:
        ax.plot([p[0] for p in known], [p[1] for p in known], "o-", label="published table")
    ax.plot(ms, approx_vals, "s--", label="linear approximation")
    simk = [(m, v) for m, v in zip(ms, sim_vals) if v is not None]
    if simk:
        ax.plot([p[0] for p in simk], [p[1] for p in simk], "^:", label=f"simulated ({simulate_samples})")
    ax.set_xlabel("missing entries m")
    ax.set_ylabel(f"random index for n={n}")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.4)
    fig.tight_layout()
    png = os.path.join(out_dir, f"{stem}.png")
    fig.savefig(png, dpi=150)
    plt.close(fig)
    return {"tsv": tsv, "png": png}
