"""
Plot-script emission

Each recognized result file gets a standalone matplotlib script written
next to it; running the script renders a PNG. Nothing is drawn here.
"""

import logging
from pathlib import Path
from typing import Dict, List, Union

try:
    from ..utils.errors import MissingResults
except ImportError:
    from utils.errors import MissingResults

logger = logging.getLogger(__name__)

SCRIPT_HEADER = '''"""
{title}

Generated plotting script; reads {inputs} from this directory.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

HERE = Path(__file__).resolve().parent


def load(name):
    return pd.read_csv(HERE / name, comment="#")

'''

SCRIPT_FOOTER = '''
figure.tight_layout()
figure.savefig(HERE / "{output}", dpi=150)
print("Saved", HERE / "{output}")
'''

FIG3_BODY = '''
frame = load("fig3.csv")
figure, ax = plt.subplots(figsize=(8, 5))
for strategy, color, label in (("random", "lightgrey", "random"), ("top_betweenness", "dimgrey", "betweenness")):
    part = frame[(frame["strategy"] == strategy) & (frame["k"] > 0)].sort_values("k")
    if part.empty:
        continue
    ax.fill_between(part["k"], part["lower_norm"], part["upper_norm"], color=color, alpha=0.7, label=label)
    ax.plot(part["k"], part["upper_norm"], color="black", linewidth=1)
    ax.plot(part["k"], part["lower_norm"], color="black", linewidth=1, linestyle="--")
ax.set_xscale("log")
ax.set_xlabel("SDN cluster size k")
ax.set_ylabel("E[T_SD | k] / E[T_SD | k=0]")
ax.set_ylim(0, 1.05)
ax.grid(True, alpha=0.3)
ax.legend()
'''

PATH_LENGTHS_BODY = '''
frame = load("path_lengths.csv")
figure, ax = plt.subplots(figsize=(7, 4))
ax.bar(frame["d"], frame["probability"], color="steelblue")
ax.set_xlabel("path length d")
ax.set_ylabel("P{d}")
ax.grid(True, alpha=0.3)
'''

TABLE_BODY = '''
frame = load("table_bounds.csv")
figure, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
for ax, (d, part) in zip(axes, frame.groupby("d")):
    ax.fill_between(part["k"], part["lower_norm"], part["upper_norm"], color="lightgrey", label="bounds")
    ax.errorbar(part["k"], part["sim_norm"], yerr=part["sim_se"], marker="o", color="black", label="simulation")
    ax.set_title(f"d = {d}")
    ax.set_xlabel("SDN cluster size k")
    ax.grid(True, alpha=0.3)
axes[0].set_ylabel("E[T_SD | d, k] / E[T_SD | d, k=0]")
axes[0].legend()
'''

FIG5_BODY = '''
frame = load("fig5.csv")
figure, ax = plt.subplots(figsize=(8, 5))
for d, part in frame.groupby("d"):
    part = part.sort_values("k")
    ax.errorbar(part["k"], part["ratio"], yerr=part["ratio_se"], marker="o", label=f"d = {d}")
ax.set_xlabel("SDN cluster size k")
ax.set_ylabel("E[T_SD | d, k] / E[T_SD | d, k=0]")
ax.grid(True, alpha=0.3)
ax.legend()
'''

FIG6_BODY = '''
names = [name for name in ("fig6_exp.csv", "fig6_uni.csv") if (HERE / name).exists()]
frames = {name: load(name) for name in names}
ks = sorted({int(k) for frame in frames.values() for k in frame["k"]})
figure, axes = plt.subplots(len(ks), len(names), figsize=(5 * len(names), 4 * len(ks)), squeeze=False)
for column, name in enumerate(names):
    for row, k in enumerate(ks):
        ax = axes[row][column]
        part = frames[name][frames[name]["k"] == k].sort_values("d")
        ax.fill_between(part["d"], part["lower"], part["upper"], color="lightgrey", label="bounds")
        ax.errorbar(part["d"], part["sim_mean"], yerr=part["sim_se"], marker="s", color="black", label="simulation")
        ax.set_title(f"{name[:-4]}, k = {k}")
        ax.set_xlabel("path length d")
        ax.set_ylabel("E[T_SD | d]")
        ax.grid(True, alpha=0.3)
        ax.legend()
'''

FIG7_BODY = '''
names = sorted((path.name for path in HERE.glob("fig7_ell*.csv")), key=lambda name: int(name[8:-4]))
figure, axes = plt.subplots(1, len(names), figsize=(5 * len(names), 4), sharey=True, squeeze=False)
for ax, name in zip(axes[0], names):
    frame = load(name).sort_values("k")
    ax.plot(frame["k"], frame["analytic_norm"], color="red", label="chain model")
    ax.errorbar(frame["k"], frame["sim_exp_norm"], yerr=frame["sim_exp_se"], marker="s", color="black", label="exponential")
    ax.errorbar(frame["k"], frame["sim_uni_norm"], yerr=frame["sim_uni_se"], marker="o", color="blue", label="uniform")
    ax.set_title("ell = " + name[8:-4])
    ax.set_xlabel("SDN cluster size k")
    ax.set_ylim(0, 1.05)
    ax.grid(True, alpha=0.3)
axes[0][0].set_ylabel("E[T_ell | k] / E[T_ell | k=0]")
axes[0][0].legend()
'''

PARTIAL_BODY = '''
frame = load("{source}")
figure, ax = plt.subplots(figsize=(8, 5))
for ell, part in frame.groupby("ell_fraction"):
    part = part.sort_values("k")
    ax.errorbar(part["k"], part["ratio"], yerr=part["ratio_se"], marker="o", label=f"ell = {ell:g} N")
ax.set_xlabel("SDN cluster size k")
ax.set_ylabel("E[T_ell | k] / E[T_ell | k=0]")
ax.set_ylim(0, 1.05)
ax.grid(True, alpha=0.3)
ax.legend()
'''

BOUNDS_BODY = FIG3_BODY.replace("fig3.csv", "bounds.csv")

CONVERGENCE_BODY = '''
frame = load("convergence.csv").sort_values("k")
figure, ax = plt.subplots(figsize=(8, 5))
for column in [name for name in frame.columns if name.endswith("_norm")]:
    ax.plot(frame["k"], frame[column], marker="o", label=column[:-5])
ax.set_xlabel("SDN cluster size k")
ax.set_ylabel("normalized expected time")
ax.grid(True, alpha=0.3)
ax.legend()
'''

# trigger file -> (script name, title, body, rendered image)
FIGURES: Dict[str, tuple] = {
    "fig3.csv": ("plot_fig3.py", "Normalized T_SD bounds, random and betweenness clusters", FIG3_BODY, "fig3.png"),
    "table_bounds.csv": ("plot_table_bounds.py", "Normalized T_SD per path length", TABLE_BODY, "table_bounds.png"),
    "fig5.csv": ("plot_fig5.py", "Normalized T_SD per path length, Internet graph", FIG5_BODY, "fig5.png"),
    "fig6_exp.csv": ("plot_fig6.py", "Simulated T_SD against analytic bounds", FIG6_BODY, "fig6.png"),
    "fig6_uni.csv": ("plot_fig6.py", "Simulated T_SD against analytic bounds", FIG6_BODY, "fig6.png"),
    "fig7_ell*.csv": ("plot_fig7.py", "Normalized partial convergence, chain model and simulation", FIG7_BODY, "fig7.png"),
    "fig8.csv": ("plot_fig8.py", "Normalized partial convergence, Internet graph",
                 PARTIAL_BODY.replace("{source}", "fig8.csv"), "fig8.png"),
    "partial.csv": ("plot_partial.py", "Normalized partial convergence",
                    PARTIAL_BODY.replace("{source}", "partial.csv"), "partial.png"),
    "bounds.csv": ("plot_bounds.py", "Normalized T_SD bounds", BOUNDS_BODY, "bounds.png"),
    "convergence.csv": ("plot_convergence.py", "Chain-model convergence times", CONVERGENCE_BODY, "convergence.png"),
    "path_lengths.csv": ("plot_path_lengths.py", "Path length distribution", PATH_LENGTHS_BODY, "path_lengths.png"),
}


def render_script(title: str, inputs: str, body: str, output: str) -> str:
    header = SCRIPT_HEADER.format(title=title, inputs=inputs)
    return header + body + SCRIPT_FOOTER.format(output=output)


def cmd_emit_plots(results_dir: Union[str, Path]) -> List[Path]:
    """Write one plotting script per recognized figure in ``results_dir``"""
    results_dir = Path(results_dir)
    if not results_dir.is_dir():
        raise MissingResults(f"Results directory does not exist: {results_dir}")

    written: Dict[str, Path] = {}
    for pattern, (script, title, body, output) in FIGURES.items():
        matches = sorted(results_dir.glob(pattern))
        if not matches or script in written:
            continue
        inputs = ", ".join(match.name for match in matches)
        path = results_dir / script
        path.write_text(render_script(title, inputs, body, output))
        written[script] = path
        logger.info(f"Wrote plot script {path}")

    if not written:
        raise MissingResults(f"No plottable results in {results_dir}")
    return sorted(written.values())
