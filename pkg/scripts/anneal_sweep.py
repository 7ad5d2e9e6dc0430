"""Sweep annealing-proxy schedules on a reduced desk instance and write one CSV row per grid point."""
import argparse
import csv
from pathlib import Path

from heavyhex_qa.annealer import anneal_sample, project_samples, qa_param_grid
from heavyhex_qa.instance import brute_force_minimum, generate_instance
from heavyhex_qa.reduction import reduce_instance
from heavyhex_qa.topology import desk_lattice


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reads", type=int, default=500)
    ap.add_argument("--times", type=float, nargs="*", help="restrict to these anneal times")
    ap.add_argument("--out", default="results/anneal_sweep.csv")
    args = ap.parse_args()

    inst = generate_instance(desk_lattice(args.size), args.seed)
    red = reduce_instance(inst)
    ground, _ = brute_force_minimum(inst)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["anneal_time", "pause_location", "pause_fraction", "mean_energy", "min_energy", "ground_hits"])
        for k, p in enumerate(qa_param_grid()):
            if args.times and float(p.anneal_time) not in args.times:
                continue
            ss = project_samples(anneal_sample(red, p.schedule(), args.reads, args.seed + k), inst, red)
            hits = sum(c for c, e in zip(ss.counts, ss.energies) if e == ground)
            w.writerow([p.anneal_time, float(p.pause_location), float(p.pause_fraction), repr(ss.mean_energy()), repr(ss.min_energy()), hits])
            print(p.anneal_time, float(p.pause_location), float(p.pause_fraction), round(ss.mean_energy(), 3), hits, flush=True)
    print(f"ground energy {ground}; wrote {out}")


if __name__ == "__main__":
    main()
