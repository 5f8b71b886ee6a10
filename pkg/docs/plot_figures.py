"""Plot the CSV written by the figure commands.

    liouvillecs figure1 --out fig1.csv
    python3 docs/plot_figures.py fig1.csv fig1.png

Needs matplotlib, which is not a dependency of the package.
"""

import csv
import sys


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    columns = {name: [float(r[i]) for r in body] for i, name in enumerate(header)}
    return header, columns


def main(argv):
    if len(argv) != 2:
        print(__doc__, file=sys.stderr)
        return 1
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, cols = load(argv[0])
    t = cols["time"]
    groups = {}
    for name in header[1:]:
        # R_*, z_re_*, z_im_* or purity_* columns
        prefix = name.split("_delta")[0].split("_a")[0] if not name.startswith("purity") \
            else "purity"
        groups.setdefault(prefix, []).append(name)
    fig, axes = plt.subplots(len(groups), 1, sharex=True, figsize=(6, 2.5 * len(groups)),
                             squeeze=False)
    for ax, (prefix, names) in zip(axes[:, 0], groups.items()):
        for name in names:
            ax.plot(t, cols[name], label=name)
        ax.set_ylabel(prefix)
        ax.legend(fontsize=6)
    axes[-1, 0].set_xlabel("time")
    fig.tight_layout()
    fig.savefig(argv[1], dpi=150)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
