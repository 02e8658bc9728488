"""Run the default karate campaign and print the comparison table.

    python3 scripts/run_karate_campaign.py --runs 2000 --out karate-campaign
"""
import argparse
import time

from fjbvp.files import write_campaign
from fjbvp.montecarlo import CampaignConfig, run_campaign


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--runs", type=int, default=2000)
    p.add_argument("--seed", type=int, default=CampaignConfig.seed)
    p.add_argument("--closeness", choices=("log", "definition"), default="log")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="karate-campaign")
    args = p.parse_args()

    cfg = CampaignConfig(runs=args.runs, seed=args.seed, closeness=args.closeness)
    start = time.perf_counter()
    result = run_campaign(None, cfg, threads=args.threads)
    elapsed = time.perf_counter() - start
    write_campaign(result, args.out)

    print(f"{result.valid_runs.size} valid runs ({result.ill_posed_runs} ill-posed) in {elapsed:.1f} s")
    print(f"{'measure':8s} {'pearson':>8s} {'spearman':>9s} {'top5':>5s}")
    for m, st in result.statistics.items():
        print(f"{m:8s} {st['pearson']:8.3f} {st['spearman']:9.3f} {st['top5']:5.2f}")
    print("bound violations:", result.bound_violations)


if __name__ == "__main__":
    main()
