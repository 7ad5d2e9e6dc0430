"""Command-line pipeline: lattice -> instance -> circuits / reduction -> sampling -> analysis.

Every invocation writes ``<command>.manifest.json`` to ``--out-dir`` listing
its arguments and the sha256 of every file it wrote.  Exit codes: 0 success,
2 validation error, 3 simulation qubit-cap error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import analyze_comparison, render_histogram
from .annealer import ProxyConfig, anneal_sample, build_pause_schedule, load_proxy_config, project_samples, schedule_to_csv
from .instance import generate_instance, load_instance, load_samples, random_baseline, save_instance, save_samples
from .pegasus import (
    NativeEmbedding,
    build_pegasus,
    complete_washington_instance,
    export_annealer_problem,
    load_coupler_list,
    load_id_list,
    tile_embeddings,
)
from .qaoa import DEFAULT_DURATIONS, AngleParams, build_qaoa_circuit, decode_samples, from_openqasm, insert_ddd, load_durations, to_openqasm
from .reduction import load_reduced, reduce_instance, save_reduced
from .search import angle_grid, combo_seed, run_grid_search, save_grid_result
from .simulator import DEFAULT_QUBIT_CAP, QubitCapError, index_to_bits, probabilities, run_statevector, sample_indices, save_amplitudes
from .topology import LatticeError, build_heavy_hex, completed_washington, desk_lattice, load_lattice, load_washington, save_lattice

BUILTIN = {"builtin:ibm_washington": load_washington, "builtin:ibm_washington_completed": lambda: completed_washington()[0]}


class Run:
    """Output bookkeeping for one invocation."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.outputs: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.outputs.append(p)
        return p

    def note(self, *paths: Path) -> None:
        self.outputs.extend(paths)

    def _relative(self, v):
        """Paths relative to the output dir, including the path in ``label=path``."""
        if not isinstance(v, str):
            return v
        if os.path.exists(v):
            return os.path.relpath(v, self.out_dir)
        label, sep, rest = v.partition("=")
        if sep and os.path.exists(rest):
            return f"{label}={os.path.relpath(rest, self.out_dir)}"
        return v

    def manifest(self, command: str, extra: dict | None = None) -> None:
        args = {}
        for k, v in sorted(vars(self.args).items()):
            if k in ("func", "out_dir"):
                continue
            if isinstance(v, list):
                v = [self._relative(x) for x in v]
            else:
                v = self._relative(v)
            args[k] = v
        files = {}
        for p in self.outputs:
            if p.exists():
                files[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
        doc = {"command": command, "version": __version__, "args": args, "outputs": dict(sorted(files.items()))}
        if extra:
            doc["summary"] = extra
        (self.out_dir / f"{command}.manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def resolve_lattice(ref: str, relative_to: Path | None = None):
    if ref in BUILTIN:
        return BUILTIN[ref]()
    p = Path(ref)
    if not p.is_absolute() and relative_to is not None and (relative_to / p).exists():
        p = relative_to / p
    return load_lattice(p)


def load_problem(instance_path: str):
    """Instance plus the lattice its header points to."""
    from .instance import loads_instance

    path = Path(instance_path)
    _, lattice_ref = loads_instance(path.read_text())
    lattice = resolve_lattice(lattice_ref, path.parent)
    inst, _ = load_instance(path, lattice)
    return inst, lattice, lattice_ref


def _durations(args):
    if getattr(args, "durations", None):
        table, alignment = load_durations(args.durations)
    else:
        table, alignment = dict(DEFAULT_DURATIONS), 1
    if getattr(args, "alignment", None):
        alignment = args.alignment
    return table, alignment


# -- subcommands -----------------------------------------------------------------

def cmd_lattice(args, run: Run):
    if args.kind == "heavyhex":
        lat = build_heavy_hex(args.rows, args.cols)
    elif args.kind == "washington":
        lat = load_washington()
    elif args.kind == "completed":
        lat = completed_washington()[0]
    else:
        lat = desk_lattice(args.size)
    out = run.path(args.output)
    save_lattice(lat, out)
    return {"nodes": lat.num_nodes, "edges": len(lat.edges), "cubic_sites": len(lat.cubic_sites)}


def cmd_instance(args, run: Run):
    lattice = resolve_lattice(args.lattice)
    inst = generate_instance(lattice, args.seed)
    out = run.path(args.output)
    ref = args.lattice if args.lattice in BUILTIN else os.path.relpath(Path(args.lattice).resolve(), out.parent.resolve())
    save_instance(inst, out, ref)
    return {"terms": inst.num_terms()}


def cmd_compile(args, run: Run):
    inst, lattice, _ = load_problem(args.instance)
    if args.grid is not None:
        grid = angle_grid(args.rounds)
        if not 0 <= args.grid < len(grid):
            raise ValueError(f"grid index must be in [0, {len(grid)})")
        params = grid.combo(args.grid)
    else:
        if not args.gamma or not args.beta:
            raise ValueError("give --gamma and --beta, or --grid")
        if len(args.gamma) != args.rounds or len(args.beta) != args.rounds:
            raise ValueError("--gamma/--beta need one value per round")
        params = AngleParams(tuple(args.gamma), tuple(args.beta))
    circ = build_qaoa_circuit(lattice, inst, params)
    if args.ddd:
        table, alignment = _durations(args)
        circ = insert_ddd(circ, table, alignment)
    run.path(args.output).write_text(to_openqasm(circ))
    return {"gates": len(circ.gates), "gammas": list(params.gammas), "betas": list(params.betas)}


def cmd_simulate(args, run: Run):
    inst, _, _ = load_problem(args.instance)
    circ = from_openqasm(Path(args.qasm).read_text())
    state = run_statevector(circ, cap=args.qubit_cap)
    probs = probabilities(state)
    counts = sample_indices(probs, args.shots, args.seed)
    n = circ.num_qubits
    bits = {index_to_bits(int(i), n): int(counts[i]) for i in counts.nonzero()[0]}
    ss = decode_samples(bits, inst, {"method": "qaoa-simulated", "qasm": Path(args.qasm).name, "shots": args.shots, "seed": args.seed})
    out = run.path(args.output)
    save_samples(ss, out)
    run.note(out.with_suffix(out.suffix + ".json"))
    if args.amplitudes:
        save_amplitudes(state, run.path(args.amplitudes))
    return {"mean": ss.mean_energy(), "min": ss.min_energy()}


def cmd_grid_search(args, run: Run):
    inst, lattice, _ = load_problem(args.instance)
    table, alignment = _durations(args)
    grid = angle_grid(args.rounds)
    res = run_grid_search(lattice, inst, grid, args.shots, args.seed, args.ddd, table, alignment, args.method, args.threads, args.qubit_cap)
    out = run.path(args.output)
    save_grid_result(res, out)
    run.note(out.with_suffix(out.suffix + ".json"))
    best = res.best
    circ = build_qaoa_circuit(lattice, inst, best.params)
    if args.ddd:
        circ = insert_ddd(circ, table, alignment)
    counts = sample_indices(probabilities(run_statevector(circ, cap=args.qubit_cap)), args.shots, combo_seed(args.seed, best.index))
    bits = {index_to_bits(int(i), lattice.num_nodes): int(counts[i]) for i in counts.nonzero()[0]}
    label = f"qaoa-p{args.rounds}{'-ddd' if args.ddd else ''}"
    ss = decode_samples(bits, inst, {"method": label, "combo": best.index, "shots": args.shots, "seed": args.seed})
    sp = run.path(Path(args.output).stem + "_best_samples.csv")
    save_samples(ss, sp)
    run.note(sp.with_suffix(sp.suffix + ".json"))
    return {"best_index": best.index, "best_mean": best.mean_energy, "combos": len(res.records)}


def cmd_reduce(args, run: Run):
    inst, lattice, ref = load_problem(args.instance)
    if args.complete_washington:
        inst, lattice, _ = complete_washington_instance(inst)
        save_lattice(lattice, run.path("completed_lattice.hhx"))
    red = reduce_instance(inst)
    out = run.path(args.output)
    save_reduced(red, out)
    run.note(out.with_suffix(".slacks.json"))
    return {"variables": red.num_vars, "couplers": len(red.quadratic), "offset": red.offset}


def _graph(args):
    dq = load_id_list(args.dead_qubits) if args.dead_qubits else []
    dc = load_coupler_list(args.dead_couplers) if args.dead_couplers else []
    return build_pegasus(args.m, dq, dc)


def cmd_pegasus(args, run: Run):
    if args.action == "build":
        g = _graph(args)
        deg: dict[int, int] = {}
        for q, nb in g.adjacency().items():
            deg[len(nb)] = deg.get(len(nb), 0) + 1
        kinds: dict[str, int] = {}
        for k in g.edges.values():
            kinds[k] = kinds.get(k, 0) + 1
        doc = {"m": g.m, "qubits": len(g.nodes), "couplers": len(g.edges), "coupler_kinds": dict(sorted(kinds.items())),
               "degree_histogram": {str(k): v for k, v in sorted(deg.items())}}
        run.path(args.output or f"pegasus_{args.m}.json").write_text(json.dumps(doc, indent=2) + "\n")
        return doc
    if args.action == "tile":
        if not args.reduced or not args.lattice:
            raise ValueError("tile needs --reduced and --lattice")
        red = load_reduced(args.reduced)
        lattice = resolve_lattice(args.lattice)
        g = _graph(args)
        til = tile_embeddings(red, lattice, g, args.max_copies, repair_budget=args.repair_budget)
        doc = {"m": args.m, "copies": len(til), "offsets": [list(o) for o in til.offsets], "repaired": list(til.repaired),
               "embeddings": [{"tile": e.tile, "mapping": {str(v): q for v, q in sorted(e.mapping.items())}} for e in til.embeddings]}
        run.path(args.output or "tiling.json").write_text(json.dumps(doc, indent=1) + "\n")
        return {"copies": len(til)}
    if not args.reduced or not args.tiling:
        raise ValueError("export needs --reduced and --tiling")
    red = load_reduced(args.reduced)
    til = json.loads(Path(args.tiling).read_text())
    embs = [NativeEmbedding({int(v): int(q) for v, q in e["mapping"].items()}, e["tile"]) for e in til["embeddings"]]
    g = _graph(args)
    text = export_annealer_problem(red, embs, g, {"tiling": Path(args.tiling).name, "m": args.m})
    run.path(args.output or "annealer_problem.json").write_text(text)
    return {"tiles": len(embs)}


def cmd_anneal(args, run: Run):
    red = load_reduced(args.reduced)
    cfg = load_proxy_config(args.config) if args.config else ProxyConfig()
    schedule = build_pause_schedule(args.anneal_time, args.pause_location, args.pause_fraction)
    run.path("schedule.csv").write_text(schedule_to_csv(schedule))
    ss = anneal_sample(red, schedule, args.reads, args.seed, cfg)
    if args.instance:
        inst, _, _ = load_problem(args.instance)
        ss = project_samples(ss, inst, red)
    out = run.path(args.output)
    save_samples(ss, out)
    run.note(out.with_suffix(out.suffix + ".json"))
    return {"mean": ss.mean_energy(), "min": ss.min_energy()}


def cmd_baseline(args, run: Run):
    inst, _, _ = load_problem(args.instance)
    ss = random_baseline(inst, args.shots, args.seed)
    out = run.path(args.output)
    save_samples(ss, out)
    run.note(out.with_suffix(out.suffix + ".json"))
    return {"mean": ss.mean_energy(), "min": ss.min_energy()}


def _parse_entries(entries: list[str]) -> dict[str, dict[str, object]]:
    data: dict[str, dict[str, object]] = {}
    for e in entries:
        parts = e.split("=", 1)
        if len(parts) != 2 or parts[0].count(":") != 1:
            raise ValueError(f"entries look like instance:method=path, got {e!r}")
        inst, method = parts[0].split(":")
        data.setdefault(inst, {})[method] = load_samples(parts[1])
    return data


def cmd_analyze(args, run: Run):
    report = analyze_comparison(_parse_entries(args.entry))
    run.path(args.output + ".json").write_text(report.to_json())
    run.path(args.output + "_wins.csv").write_text(report.win_table_csv())
    return {"instances": len(report.instances), "methods": list(report.methods)}


def cmd_plot(args, run: Run):
    sets = []
    for e in args.samples:
        label, _, path = e.partition("=")
        if not path:
            raise ValueError(f"samples look like label=path, got {e!r}")
        sets.append((label, load_samples(path)))
    svg, csvp = render_histogram(sets, Path(args.out_dir) / args.output, args.bin_width, args.title)
    run.note(svg, csvp)
    return {"bins_csv": csvp.name}


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heavyhex-qa", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lattice", help="write a heavy-hex lattice file")
    s.add_argument("--kind", choices=["heavyhex", "washington", "completed", "desk"], default="heavyhex")
    s.add_argument("--rows", type=int, default=1)
    s.add_argument("--cols", type=int, default=1)
    s.add_argument("--size", type=int, default=10, help="node count for --kind desk")
    s.add_argument("--output", default="lattice.hhx")
    s.set_defaults(func=cmd_lattice)

    s = sub.add_parser("instance", help="draw a random +/-1 cubic instance")
    s.add_argument("--lattice", required=True, help="lattice file or builtin:ibm_washington")
    s.add_argument("--output", default="instance.txt")
    s.set_defaults(func=cmd_instance)

    def durations(sp):
        sp.add_argument("--ddd", action="store_true", help="insert X-X decoupling pairs")
        sp.add_argument("--durations", help="key=value gate duration table")
        sp.add_argument("--alignment", type=int, default=None)

    s = sub.add_parser("compile-qaoa", help="emit an OpenQASM 2.0 QAOA circuit")
    s.add_argument("--instance", required=True)
    s.add_argument("--rounds", type=int, default=1)
    s.add_argument("--gamma", type=float, nargs="*")
    s.add_argument("--beta", type=float, nargs="*")
    s.add_argument("--grid", type=int, default=None, help="use this combo index of the standard angle grid")
    s.add_argument("--output", default="circuit.qasm")
    durations(s)
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", help="sample an OpenQASM circuit on the statevector simulator")
    s.add_argument("--qasm", required=True)
    s.add_argument("--instance", required=True)
    s.add_argument("--shots", type=int, default=10000)
    s.add_argument("--qubit-cap", type=int, default=DEFAULT_QUBIT_CAP)
    s.add_argument("--amplitudes", default=None, help="also dump amplitudes to this CSV")
    s.add_argument("--output", default="qaoa_samples.csv")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("grid-search", help="full angle-grid search")
    s.add_argument("--instance", required=True)
    s.add_argument("--rounds", type=int, choices=[1, 2], default=1)
    s.add_argument("--shots", type=int, default=10000)
    s.add_argument("--method", choices=["table", "circuit"], default="table")
    s.add_argument("--qubit-cap", type=int, default=DEFAULT_QUBIT_CAP)
    s.add_argument("--output", default="grid.csv")
    durations(s)
    s.set_defaults(func=cmd_grid_search)

    s = sub.add_parser("reduce", help="order-reduce a cubic instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--complete-washington", action="store_true", help="lift onto the completed lattice first")
    s.add_argument("--output", default="reduced.txt")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("pegasus", help="Pegasus graph, tiling and export")
    s.add_argument("action", choices=["build", "tile", "export"])
    s.add_argument("--m", type=int, default=16)
    s.add_argument("--dead-qubits")
    s.add_argument("--dead-couplers")
    s.add_argument("--reduced")
    s.add_argument("--lattice", help="lattice with grid positions (tile)")
    s.add_argument("--tiling", help="tiling JSON (export)")
    s.add_argument("--max-copies", type=int, default=6)
    s.add_argument("--repair-budget", type=int, default=0)
    s.add_argument("--output", default=None)
    s.set_defaults(func=cmd_pegasus)

    s = sub.add_parser("anneal", help="pause-schedule annealing proxy")
    s.add_argument("--reduced", required=True)
    s.add_argument("--instance", help="project onto this original instance")
    s.add_argument("--anneal-time", type=float, default=100.0)
    s.add_argument("--pause-location", type=float, default=0.5)
    s.add_argument("--pause-fraction", type=float, default=0.5)
    s.add_argument("--reads", type=int, default=500)
    s.add_argument("--config", help="key=value proxy config")
    s.add_argument("--output", default="anneal_samples.csv")
    s.set_defaults(func=cmd_anneal)

    s = sub.add_parser("baseline", help="uniform random sampling baseline")
    s.add_argument("--instance", required=True)
    s.add_argument("--shots", type=int, default=10000)
    s.add_argument("--output", default="random_samples.csv")
    s.set_defaults(func=cmd_baseline)

    s = sub.add_parser("analyze", help="pairwise win counts over instances")
    s.add_argument("--entry", action="append", required=True, help="instance:method=samples.csv")
    s.add_argument("--output", default="comparison")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("plot", help="energy histogram with mean and min markers")
    s.add_argument("--samples", action="append", required=True, help="label=samples.csv")
    s.add_argument("--bin-width", type=float, default=2.0)
    s.add_argument("--title", default="")
    s.add_argument("--output", default="histogram")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    run = Run(args)
    try:
        summary = args.func(args, run)
    except QubitCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, LatticeError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    run.manifest(args.command, summary)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
