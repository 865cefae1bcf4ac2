"""Figure rendering for experiment reports.

The delimited output is the machine contract; figures are a human-facing
companion written next to it when a plot directory is requested.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_growth_figure(rows, out_dir: str, stem: str = "growth") -> list:
    """One PNG per epsilon: growth rate vs n with CI whiskers and references.

    Returns the written paths.  Rows with zero mean count have no growth rate
    and are drawn as markers on the lower axis edge.
    """
    os.makedirs(out_dir, exist_ok=True)
    by_eps: dict = {}
    for row in rows:
        by_eps.setdefault(str(row.epsilon), []).append(row)
    written = []
    for eps_label, group in sorted(by_eps.items()):
        seen = set()
        points = []
        refs = {}
        for row in group:
            refs[row.reference_kind] = row.reference_value
            key = (row.n, row.sampler)
            if key in seen:
                continue
            seen.add(key)
            points.append(row)
        fig, ax = plt.subplots(figsize=(5.4, 3.6))
        samplers = sorted({p.sampler for p in points})
        for sampler in samplers:
            sub = sorted((p for p in points if p.sampler == sampler), key=lambda p: p.n)
            ns = [p.n for p in sub]
            ys, lows, highs, empty_ns = [], [], [], []
            for p in sub:
                if p.growth_rate is None:
                    empty_ns.append(p.n)
                    continue
                ys.append((p.n, p.growth_rate,
                           math.log(p.ci_low) / p.n if p.ci_low > 0 else None,
                           math.log(p.ci_high) / p.n if p.ci_high > 0 else None))
            if ys:
                xs = [t[0] for t in ys]
                vals = [t[1] for t in ys]
                ax.plot(xs, vals, "o-", label=sampler)
                for x, v, lo, hi in ys:
                    if lo is not None and hi is not None:
                        ax.vlines(x, lo, hi, alpha=0.4)
            if empty_ns:
                ax.plot(empty_ns, [ax.get_ylim()[0]] * len(empty_ns), "x",
                        label=f"{sampler} (count 0)")
        for kind, val in sorted(refs.items()):
            if val is not None:
                ax.axhline(val, linestyle="--", alpha=0.6, label=kind)
        ax.set_xlabel("n")
        ax.set_ylabel("(1/n) log mean count")
        ax.set_title(f"growth rate, eps = {eps_label}")
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}_eps_{eps_label.replace('/', '_')}.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
