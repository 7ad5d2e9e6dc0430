"""The end-to-end CLI run shared by the CLI tests and the determinism criterion."""
from pathlib import Path

from heavyhex_qa.cli import main


def run_pipeline(out: Path, seed: int = 0) -> None:
    out = Path(out)

    def call(*argv):
        code = main(["--seed", str(seed), "--out-dir", str(out), *argv])
        assert code == 0, argv

    call("lattice", "--kind", "desk", "--size", "10")
    call("instance", "--lattice", str(out / "lattice.hhx"))
    inst = str(out / "instance.txt")
    call("compile-qaoa", "--instance", inst, "--gamma", "0.6", "--beta", "0.3", "--ddd")
    call("simulate", "--qasm", str(out / "circuit.qasm"), "--instance", inst, "--shots", "2000")
    call("baseline", "--instance", inst, "--shots", "2000")
    call("grid-search", "--instance", inst, "--shots", "500")
    call("reduce", "--instance", inst)
    call("anneal", "--reduced", str(out / "reduced.txt"), "--instance", inst, "--reads", "50",
         "--anneal-time", "10")
    call("analyze", "--entry", f"desk:qaoa={out / 'qaoa_samples.csv'}", "--entry", f"desk:random={out / 'random_samples.csv'}",
         "--entry", f"desk:anneal={out / 'anneal_samples.csv'}")
    call("plot", "--samples", f"qaoa={out / 'qaoa_samples.csv'}", "--samples", f"random={out / 'random_samples.csv'}")


def output_files(out: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(Path(out).iterdir()) if p.is_file()}
