"""Shared command-line plumbing for the experiment scripts."""

import argparse
import logging
from dataclasses import replace

from fanetsim.config import load_config
from fanetsim.harness import run_experiment, summarize


def parser(description: str, networks: int, out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", help="INI file (default: shipped reference file)")
    p.add_argument("--networks", type=int, default=networks, help=f"networks per cell (default {networks})")
    p.add_argument("--samples", type=int, help="Monte Carlo samples per routing call")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=out, help=f"runs CSV (default {out})")
    return p


def sweep(args, **fields):
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg = load_config(args.config)
    extra = {"n_mc_samples": args.samples, "master_seed": args.seed}
    cfg = replace(cfg, n_networks=args.networks, n_jobs=args.jobs, output=args.out,
                  **{k: v for k, v in extra.items() if v is not None}, **fields)
    return summarize(run_experiment(cfg, progress=True))


def label(row) -> str:
    return f"{row['protocol']}-{'T' if row['variant'] == 'tracked' else 'I'}"
