"""Throughput and interference against the number of antenna elements.

Each network is evaluated with every array size, so the columns are paired.
The interference column is the mean power the route leaks into UAVs off the
route, in dB above the noise floor.
"""

from _common import label, parser, sweep

ANTENNAS = [1, 4, 8, 16, 32, 64]


def main():
    p = parser(__doc__.splitlines()[0], 100, "results/antennas.csv")
    p.add_argument("--density", type=float, default=50000.0)
    args = p.parse_args()
    rows = sweep(args, densities=[args.density], antennas=ANTENNAS)
    print("throughput (Mb/s)")
    print(f"{'M':12s} " + " ".join(f"{m:6d}" for m in ANTENNAS))
    names = sorted({label(r) for r in rows})
    cell = {(label(r), r["antennas"]): r for r in rows}
    for name in names:
        print(f"{name:12s} " + " ".join(f"{cell[(name, m)]['mean_bps'] / 1e6:6.0f}" for m in ANTENNAS))
    print("\ninterference (dB over noise)")
    for name in names:
        print(f"{name:12s} " + " ".join(f"{cell[(name, m)]['mean_interference_db']:6.1f}" for m in ANTENNAS))


if __name__ == "__main__":
    main()
