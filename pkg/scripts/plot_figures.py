"""Plot the CSVs written by ``gavc figure``.

Usage::

    gavc figure dbc --out dbc.csv
    python3 scripts/plot_figures.py dbc dbc.csv --out dbc.png

Needs matplotlib (``pip install -e .[plot]``).
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def col(rows, name, keep=lambda r: True):
    return [float(r[name]) for r in rows if keep(r)]


def plot_dbc(rows, ax):
    sup = lambda r: r["kind"] == "superposition"  # noqa: E731
    ts = lambda r: r["kind"] == "time_sharing"  # noqa: E731
    ax.plot(col(rows, "r1_bits", sup), col(rows, "r2_bits", sup), label="superposition")
    ax.plot(col(rows, "r1_bits", ts), col(rows, "r2_bits", ts), "--", label="time sharing")
    ax.set_xlabel("R1 (bits)")
    ax.set_ylabel("R2 (bits)")


def plot_dpc(rows, ax):
    g = col(rows, "gamma")
    ax.plot(g, col(rows, "dpc_rate_bits"), label="dirty paper (optimised)")
    ax.plot(g, col(rows, "costa_rate_bits"), label="dirty paper (alpha0, rho=0)")
    ax.plot(g, col(rows, "outer_bound_bits"), label="outer bound")
    ax.plot(g, col(rows, "avc_no_interference_bits"), ":", label="AVC without interference")
    ax.set_xlabel("gamma")
    ax.set_ylabel("rate (bits)")


def plot_mimo221(rows, ax):
    lam = col(rows, "lambda")
    ax.plot(lam, col(rows, "maxmin_rate_bits"), label="max-min rate")
    ax.plot(lam, col(rows, "r_wfill_bits"), "--", label="mutual waterfilling")
    ax.plot(lam, col(rows, "upper_bound_bits"), ":", label="upper bound")
    ax.set_xlabel("lambda")
    ax.set_ylabel("rate (bits)")


PLOTTERS = {"dbc": plot_dbc, "dpc": plot_dpc, "mimo221": plot_mimo221}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("name", choices=sorted(PLOTTERS))
    p.add_argument("csv")
    p.add_argument("--out", default=None, help="image path (default: <name>.png)")
    args = p.parse_args()
    fig, ax = plt.subplots(figsize=(6, 4))
    PLOTTERS[args.name](read(args.csv), ax)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out or f"{args.name}.png", dpi=150)


if __name__ == "__main__":
    main()
