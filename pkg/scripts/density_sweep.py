"""Mean throughput against swarm density for a fixed antenna array.

Prints one row per protocol/variant with the mean at each density and the
least-squares slope (Mb/s per 10^4 UAVs/km^3) with its two-sided p-value.
"""

from scipy.stats import linregress

from _common import label, parser, sweep

DENSITIES = [25000.0 + 5000.0 * k for k in range(11)]

def main():
    p = parser(__doc__.splitlines()[0], 100, "results/density.csv")
    p.add_argument("--antennas", type=int, default=16)
    args = p.parse_args()
    rows = sweep(args, densities=DENSITIES, antennas=[args.antennas])
    print("density  " + " ".join(f"{d / 1000:5.0f}k" for d in DENSITIES))
    for name in sorted({label(r) for r in rows}):
        means = [next(r["mean_bps"] for r in rows if label(r) == name and r["density"] == d) / 1e6 for d in DENSITIES]
        fit = linregress(DENSITIES, means)
        print(f"{name:12s} " + " ".join(f"{m:6.0f}" for m in means)
              + f"   slope {fit.slope * 1e4:+6.2f}  p={fit.pvalue:.3g}")

if __name__ == "__main__":
    main()
