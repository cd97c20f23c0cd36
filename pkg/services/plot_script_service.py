"""
Plot Script Service Module - matplotlib scripts for the written CSV files
The scripts are emitted as text; matplotlib is only needed by whoever runs them.
"""

import textwrap
from typing import Dict, Sequence

from services.errors import DomainError

_PREAMBLE = '''\
"""Plot {title}. Generated by membif; reads the CSV files next to this script."""

import os

import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    return np.genfromtxt(os.path.join(HERE, name), delimiter=",", names=True,
                         comments="#", dtype=None, encoding="utf-8")


def comment_values(name, key):
    values = []
    with open(os.path.join(HERE, name), encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("# " + key + " "):
                values.append(float(line.split()[2]))
    return values


fig, ax = plt.subplots(figsize=(6, 4.5))
'''

_BODIES: Dict[str, str] = {
    "sign_map": '''
        data = np.atleast_1d(load("{sign_map}"))
        ax.scatter(data["v_minus"], data["x"], c=data["sign"], cmap="coolwarm", marker="s", s=4)
        ax.set_xlabel("V- (V)")
        ax.set_ylabel("x")
    ''',
    "nst_map": '''
        data = np.atleast_1d(load("{nst_map}"))
        points = ax.scatter(data["v_minus"], data["v_plus"], c=data["n_st"], cmap="viridis", marker="s", s=4)
        fig.colorbar(points, ax=ax, label="N_st")
        ax.set_xlabel("V- (V)")
        ax.set_ylabel("V+ (V)")
    ''',
    "curves": '''
        for name, style in (("{curve_a}", "k-"), ("{curve_b}", "k--"), ("{curve_c}", "b:"), ("{curve_d}", "r:")):
            data = np.atleast_1d(load(name))
            ax.plot(data["v_minus"], data["v_plus"], style, label=name.rsplit("_", 1)[-1].split(".")[0].upper())
        cusp = np.atleast_1d(load("{cusp}"))
        ax.plot(cusp["v_minus_c"], cusp["v_plus_c"], "ko")
        ax.legend()
        ax.set_xlabel("V- (V)")
        ax.set_ylabel("V+ (V)")
    ''',
    "fixed_points": '''
        data = np.atleast_1d(load("{fixed_points}"))
        stable = data["stability"] == "stable"
        ax.plot(data["x"][stable], np.zeros(stable.sum()), "ko", label="stable")
        ax.plot(data["x"][~stable], np.zeros((~stable).sum()), "ko", fillstyle="none", label="unstable")
        ax.legend()
        ax.set_xlim(0, 1)
        ax.set_xlabel("x")
    ''',
    "g_profile": '''
        data = np.atleast_1d(load("{g_profile}"))
        ax.plot(data["x"], data["sign"] * data["log10_abs_g"], "b-")
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_xlabel("x")
        ax.set_ylabel("sign(g) log10|g|")
    ''',
    "reduced_profile": '''
        data = np.atleast_1d(load("{reduced_profile}"))
        ax.plot(data["x"], data["lhs"], label="left side")
        ax.plot(data["x"], data["rhs"], label="right side")
        ax.legend()
        ax.set_xlabel("x")
    ''',
    "simulate": '''
        data = np.atleast_1d(load("{trajectory}"))
        if data.size:
            ax.plot(data["t_seconds"] * 1e9, data["x"], "k-")
        for value in comment_values("{trajectory}", "fixed_point"):
            ax.axhline(value, color="k", ls="--", lw=0.8)
        ax.set_xlabel("t (ns)")
        ax.set_ylabel("x")
    ''',
    "basin_scan": '''
        data = np.atleast_1d(load("{basin_scan}"))
        ax.errorbar(data["x0"], data["mean"], yerr=0.5 * data["amplitude"], fmt="ko")
        for value in comment_values("{basin_scan}", "fixed_point"):
            ax.axhline(value, color="k", ls="--", lw=0.8)
        ax.set_xlabel("x(t=0)")
        ax.set_ylabel("attractor x")
    ''',
    "validate": '''
        data = np.atleast_1d(load("{validation}"))
        ratio = data["measured"] / np.where(data["tolerance"] > 0, data["tolerance"], 1.0)
        ax.barh(data["check"], ratio, color=np.where(data["passed"] == 1, "tab:green", "tab:red"))
        ax.axvline(1.0, color="k", ls="--")
        ax.set_xlabel("measured / tolerance")
    ''',
}

_EPILOGUE = '''
fig.tight_layout()
fig.savefig(os.path.join(HERE, "{name}.png"), dpi=150)
'''


def plot_script(name: str, files: Dict[str, str]) -> str:
    """
    Source of a plotting script for the command output `name`.

    Args:
        name: one of the keys of the body table, e.g. "nst_map"
        files: placeholder -> CSV file name, e.g. {"nst_map": "nst_map.csv"}
    """
    if name not in _BODIES:
        raise DomainError(f"No plot script for {name!r}; known: {sorted(_BODIES)}.")
    try:
        body = textwrap.dedent(_BODIES[name]).format(**files)
    except KeyError as exc:
        raise DomainError(f"Plot script {name!r} needs file {exc.args[0]!r}.") from exc
    return _PREAMBLE.format(title=name.replace("_", " ")) + body + _EPILOGUE.format(name=name)


def known_plots() -> Sequence[str]:
    return sorted(_BODIES)
