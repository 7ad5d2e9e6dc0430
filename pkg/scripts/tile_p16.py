"""Tile the washington-derived reduced template onto a Pegasus graph and export the annealer problem."""
import argparse
import json
from pathlib import Path

from heavyhex_qa.instance import generate_instance
from heavyhex_qa.pegasus import build_pegasus, export_annealer_problem, load_id_list, tile_embeddings, washington_template
from heavyhex_qa.topology import load_washington


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dead-qubits", help="file of dead qubit ids")
    ap.add_argument("--repair-budget", type=int, default=0)
    ap.add_argument("--out", default="results/tiling")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    graph = build_pegasus(args.m, load_id_list(args.dead_qubits) if args.dead_qubits else [])
    red, lat = washington_template(generate_instance(load_washington(), args.seed))
    tiling = tile_embeddings(red, lat, graph, repair_budget=args.repair_budget)
    print(f"P{args.m}: {len(graph.nodes)} qubits, {len(graph.edges)} couplers")
    print(f"template: {red.num_vars} variables, {len(red.quadratic)} couplers")
    print(f"copies: {len(tiling)} at offsets {list(tiling.offsets)}, repaired {list(tiling.repaired)}")
    doc = {"m": args.m, "copies": len(tiling), "offsets": [list(o) for o in tiling.offsets],
           "embeddings": [{"tile": e.tile, "mapping": {str(v): q for v, q in sorted(e.mapping.items())}} for e in tiling.embeddings]}
    (out / "tiling.json").write_text(json.dumps(doc, indent=1) + "\n")
    (out / "annealer_problem.json").write_text(export_annealer_problem(red, tiling.embeddings, graph, {"m": args.m, "seed": args.seed}))


if __name__ == "__main__":
    main()
