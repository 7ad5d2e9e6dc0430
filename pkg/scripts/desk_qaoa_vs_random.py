"""QAOA (p=1 full grid, optionally with DDD) against uniform random sampling on desk lattices.

Writes per-instance sample CSVs, a comparison report and one histogram per
instance into --out.
"""
import argparse
from pathlib import Path

from heavyhex_qa.analysis import analyze_comparison, render_histogram
from heavyhex_qa.instance import energy_table, generate_instance, random_baseline, save_samples, SampleSet
from heavyhex_qa.qaoa import build_qaoa_circuit, decode_samples, insert_ddd
from heavyhex_qa.search import angle_grid, combo_seed, run_grid_search
from heavyhex_qa.simulator import index_to_bits, probabilities, qaoa_state_from_table, run_statevector, sample_indices
from heavyhex_qa.topology import desk_lattice


def best_samples(lat, inst, res, shots, seed, ddd) -> SampleSet:
    best = res.best
    if ddd:
        probs = probabilities(run_statevector(insert_ddd(build_qaoa_circuit(lat, inst, best.params))))
    else:
        probs = probabilities(qaoa_state_from_table(energy_table(inst), best.params.gammas, best.params.betas))
    counts = sample_indices(probs, shots, combo_seed(seed, best.index))
    bits = {index_to_bits(int(i), lat.num_nodes): int(counts[i]) for i in counts.nonzero()[0]}
    return decode_samples(bits, inst, {"method": "qaoa-ddd" if ddd else "qaoa", "combo": best.index, "seed": seed})


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 11, 12, 13, 14])
    ap.add_argument("--shots", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--ddd", action="store_true", help="also run the grid with X-X decoupling (slow)")
    ap.add_argument("--out", default="results/desk")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    data = {}
    for k, size in enumerate(args.sizes):
        lat = desk_lattice(size)
        inst = generate_instance(lat, args.seed + k)
        name = f"desk{size}"
        sets = {"random": random_baseline(inst, args.shots, args.seed + k)}
        for ddd in ([False, True] if args.ddd else [False]):
            res = run_grid_search(lat, inst, angle_grid(1), args.shots, args.seed + k, ddd=ddd, method="circuit" if ddd else "table")
            ss = best_samples(lat, inst, res, args.shots, args.seed + k, ddd)
            sets[ss.provenance["method"]] = ss
        for method, ss in sets.items():
            save_samples(ss, out / f"{name}_{method}.csv")
        render_histogram(list(sets.items()), out / f"{name}_histogram", title=name)
        data[name] = sets
        print(name, {m: round(s.mean_energy(), 3) for m, s in sets.items()})

    report = analyze_comparison(data)
    (out / "comparison.json").write_text(report.to_json())
    (out / "comparison_wins.csv").write_text(report.win_table_csv())
    print(report.win_table_csv())


if __name__ == "__main__":
    main()
