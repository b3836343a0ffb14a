"""Throughput of every protocol with tracked and ideal positions at one cell.

Quartiles per protocol, the data behind a box plot of the three protocols.

    python scripts/protocol_comparison.py --networks 240
"""

from _common import label, parser, sweep


def main():
    p = parser(__doc__.splitlines()[0], 240, "results/protocols.csv")
    p.add_argument("--density", type=float, default=50000.0)
    p.add_argument("--antennas", type=int, default=16)
    args = p.parse_args()
    rows = sweep(args, densities=[args.density], antennas=[args.antennas])
    print(f"density {args.density:g} UAVs/km^3, M={args.antennas}, {args.networks} networks  (Mb/s)")
    print(f"{'':12s} {'mean':>8} {'p25':>8} {'p50':>8} {'p75':>8}")
    for r in sorted(rows, key=label):
        print(f"{label(r):12s} " + " ".join(f"{r[k] / 1e6:8.1f}" for k in ("mean_bps", "p25_bps", "p50_bps", "p75_bps")))


if __name__ == "__main__":
    main()
