"""Figures and plot-ready tables from a finished experiment directory."""
from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import _atomic_write, to_csv  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (4.5, 3.2),
    "figure.dpi": 120,
    "savefig.bbox": "tight",
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def load_run(path) -> tuple[dict, list[dict]]:
    path = Path(path)
    record = json.loads((path / "record.json").read_text())
    trials = [json.loads(line) for line in (path / "trials.jsonl").read_text().splitlines() if line]
    return record, trials


def _coverage(record, trials, ax):
    s = record["summary"][0]
    cal = [t["ratio"] for t in trials if t["phase"] == "calibration"]
    fresh = [t["ratio"] for t in trials if t["phase"] == "fresh"]
    bins = np.linspace(0, max(max(cal), max(fresh)) * 1.05, 40)
    ax.hist(cal, bins=bins, alpha=0.6, label="calibration")
    ax.hist(fresh, bins=bins, alpha=0.6, label="fresh")
    ax.axvline(s["constant"], color="k", lw=1, ls="--", label=f"fitted c = {s['constant']:.3g}")
    ax.set_xlabel("sup / bound without constant")
    ax.set_ylabel("trials")
    ax.set_title(f"{s['experiment']}: fresh coverage {s['coverage']:.3f}")
    ax.legend(frameon=False)
    data = [{"phase": t["phase"], "index": t["index"], "ratio": t["ratio"]} for t in trials]
    return data


def _q_sweep(record, trials, ax):
    rows = [{"q": s["q"], "constant": s["constant"], "coverage": s["coverage"],
             "wilson_low": s["wilson_low"]} for s in record["summary"]]
    ax.plot([r["q"] for r in rows], [r["constant"] for r in rows], "o-")
    ax.set_xlabel("q")
    ax.set_ylabel("fitted constant c3(q)")
    ax.set_title("multiplier constant by moment order")
    return rows


def _scaling(record, rows, ax):
    x = [r["scale"] for r in rows]
    ax.loglog(x, [r["median_sup"] for r in rows], "o-", label="median sup")
    ax.loglog(x, [r["lambda_tilde"] for r in rows], "s--", label="Lambda-tilde")
    ax.set_xlabel("class scale")
    ax.set_title(f"median slope {record['summary'][0]['median_slope']:.3f}")
    ax.legend(frameon=False)
    return rows


def _tails(record, rows, ax):
    for name in ("U_l2", "V_lr"):
        pts = [(r["t_or_w"], r["frequency"]) for r in rows if r["bound_name"] == name and r["exceedances"]]
        if pts:
            ax.loglog(*zip(*pts), "o-", ms=3, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("exceedance frequency")
    ax.set_title(f"tail slope {record['summary'][0]['slope']:.2f}")
    ax.legend(frameon=False)
    return rows


def _symmetrization(record, rows, ax):
    live = [r for r in rows if r["status"] != "skipped"]
    ax.plot([r["x"] for r in live], [r["lhs"] for r in live], "o-", label="variance-corrected Pr(sup > x)")
    ax.plot([r["x"] for r in rows], [r["rhs"] for r in rows], "s--", label="min(1, 2 Pr(signed sup > x/4))")
    ax.set_xlabel("x")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    return rows


def _bernoulli(record, rows, ax):
    lv = [r["level"] for r in rows]
    ax.errorbar(lv, [r["exact"] for r in rows],
                yerr=[[r["exact"] - r["band_lo"] for r in rows], [r["band_hi"] - r["exact"] for r in rows]],
                fmt="o", capsize=3, label="exact with band")
    ax.plot(lv, [r["mc"] for r in rows], "x", label="Monte Carlo")
    ax.set_xlabel("quantile level")
    ax.legend(frameon=False)
    return rows


PLOTS = {"multiplier": _coverage, "multiplier_q_sweep": _q_sweep, "psi2_multiplier": _coverage, "quadratic": _coverage,
         "logconcave": _coverage, "subgaussian": _scaling, "tails": _tails,
         "symmetrization": _symmetrization, "bernoulli": _bernoulli}


def render(run_dir, out_dir=None) -> list[Path]:
    """Write ``<experiment>.png`` and its plot data ``<experiment>_plot.csv``."""
    record, rows = load_run(run_dir)
    if not record.get("complete"):
        raise ValueError(f"{run_dir} holds an incomplete record")
    out = Path(out_dir or run_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = record["config"]["experiment"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        data = PLOTS[name](record, rows, ax)
        png = out / f"{name}.png"
        fig.savefig(png, metadata={"Software": None})
        plt.close(fig)
    csv_path = out / f"{name}_plot.csv"
    _atomic_write(csv_path, to_csv(data))
    return [png, csv_path]
