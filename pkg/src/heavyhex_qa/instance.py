"""Random cubic Ising instances on heavy-hex lattices, energies and sample sets.

Spins take values in {-1, +1}.  A spin vector is indexed by node id, which is
dense (``0 .. n-1``) for every lattice the package builds or loads.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .topology import HeavyHexLattice, Site, _edge

Pair = tuple[int, int]


@dataclass(frozen=True)
class CubicIsing:
    """C(x) = sum_v c_v x_v + sum_(i,j) c_ij x_i x_j + sum_l c_l x_n1 x_l x_n2."""

    num_vars: int
    linear: dict[int, float]
    quadratic: dict[Pair, float]
    cubic: dict[Site, float] = field(default_factory=dict)
    lattice_ref: str = ""

    def num_terms(self) -> int:
        return len(self.linear) + len(self.quadratic) + len(self.cubic)

    def check(self) -> None:
        for v in self.linear:
            if not 0 <= v < self.num_vars:
                raise ValueError(f"linear key {v} out of range")
        for u, v in self.quadratic:
            if not (0 <= u < v < self.num_vars):
                raise ValueError(f"quadratic key {(u, v)} is not an ordered in-range pair")
        for t in self.cubic:
            if len(set(t)) != 3 or not all(0 <= v < self.num_vars for v in t):
                raise ValueError(f"cubic key {t} invalid")


def instance_for_lattice(
    lattice: HeavyHexLattice,
    linear: Mapping[int, float],
    quadratic: Mapping[Pair, float],
    cubic: Mapping[Site, float],
) -> CubicIsing:
    """Build an instance and check its keys against the lattice."""
    nodes = set(lattice.nodes)
    if sorted(nodes) != list(range(len(nodes))):
        raise ValueError("lattice node ids must be dense from 0")
    edges = set(lattice.edges)
    sites = set(lattice.cubic_sites)
    if not set(linear) <= nodes:
        raise ValueError("linear keys must be lattice nodes")
    quad = {_edge(*e): float(c) for e, c in quadratic.items()}
    if not set(quad) <= edges:
        raise ValueError("quadratic keys must be lattice edges")
    if not set(cubic) <= sites:
        raise ValueError("cubic keys must be lattice cubic sites")
    return CubicIsing(
        len(nodes),
        {int(v): float(c) for v, c in sorted(linear.items())},
        dict(sorted(quad.items())),
        {tuple(t): float(c) for t, c in sorted(cubic.items())},
        lattice.name,
    )


def generate_instance(lattice: HeavyHexLattice, seed: int) -> CubicIsing:
    """Every node, edge and cubic site receives a coefficient from {-1, +1}.

    Stream splitting: ``SeedSequence(seed).spawn(3)`` gives one PCG64 stream
    each for the linear, quadratic and cubic classes, consumed in sorted key
    order.  Adding a cubic site never perturbs the linear draws.
    """
    lin_ss, quad_ss, cub_ss = np.random.SeedSequence(int(seed)).spawn(3)

    def draw(ss: np.random.SeedSequence, count: int) -> list[float]:
        rng = np.random.Generator(np.random.PCG64(ss))
        return [float(v) for v in 1 - 2 * rng.integers(0, 2, size=count)]

    nodes = list(lattice.nodes)
    edges = list(lattice.edges)
    sites = list(lattice.cubic_sites)
    return instance_for_lattice(
        lattice,
        dict(zip(nodes, draw(lin_ss, len(nodes)))),
        dict(zip(edges, draw(quad_ss, len(edges)))),
        dict(zip(sites, draw(cub_ss, len(sites)))),
    )


def _as_spins(instance: CubicIsing, spins: Sequence[int] | np.ndarray) -> np.ndarray:
    x = np.asarray(spins)
    if x.shape[-1] != instance.num_vars:
        raise ValueError(f"expected {instance.num_vars} spins, got {x.shape[-1]}")
    if not np.all((x == 1) | (x == -1)):
        raise ValueError("spins must be +1 or -1")
    return x.astype(np.int64)


def evaluate_energy(instance: CubicIsing, spins: Sequence[int] | np.ndarray) -> float:
    x = _as_spins(instance, spins)
    if x.ndim != 1:
        raise ValueError("evaluate_energy takes one spin vector; use evaluate_many")
    e = 0.0
    for v, c in instance.linear.items():
        e += c * x[v]
    for (u, v), c in instance.quadratic.items():
        e += c * x[u] * x[v]
    for (a, m, b), c in instance.cubic.items():
        e += c * x[a] * x[m] * x[b]
    return float(e)


def evaluate_many(instance: CubicIsing, spins: np.ndarray) -> np.ndarray:
    """Energies of a ``(k, n)`` batch of spin vectors."""
    x = _as_spins(instance, spins)
    if x.ndim == 1:
        x = x[None, :]
    x = x.astype(np.float64)
    e = np.zeros(x.shape[0])
    if instance.linear:
        idx = np.fromiter(instance.linear, dtype=np.int64)
        e += x[:, idx] @ np.fromiter(instance.linear.values(), dtype=np.float64)
    if instance.quadratic:
        pairs = np.array(list(instance.quadratic), dtype=np.int64)
        c = np.fromiter(instance.quadratic.values(), dtype=np.float64)
        e += (x[:, pairs[:, 0]] * x[:, pairs[:, 1]]) @ c
    if instance.cubic:
        tri = np.array(list(instance.cubic), dtype=np.int64)
        c = np.fromiter(instance.cubic.values(), dtype=np.float64)
        e += (x[:, tri[:, 0]] * x[:, tri[:, 1]] * x[:, tri[:, 2]]) @ c
    return e


def basis_spins(n: int) -> np.ndarray:
    """``(2**n, n)`` spins of every basis index; bit q of the index is qubit q, 0 -> +1."""
    idx = np.arange(2**n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def energy_table(instance: CubicIsing) -> np.ndarray:
    """C(x) for every basis index, using the qubit-0-least-significant convention."""
    n = instance.num_vars
    if n > 26:
        raise ValueError("energy table limited to 26 variables")
    return evaluate_many(instance, basis_spins(n))


def brute_force_minimum(instance: CubicIsing) -> tuple[float, list[tuple[int, ...]]]:
    """Minimum energy and all minimizing spin vectors (sorted)."""
    table = energy_table(instance)
    emin = float(table.min())
    spins = basis_spins(instance.num_vars)[table == emin]
    return emin, sorted(tuple(int(s) for s in row) for row in spins)


# -- sample sets --------------------------------------------------------------

def spins_to_text(spins: Iterable[int]) -> str:
    return "".join("+" if s == 1 else "-" for s in spins)


def text_to_spins(text: str) -> tuple[int, ...]:
    if set(text) - {"+", "-"}:
        raise ValueError(f"bad spin string {text!r}")
    return tuple(1 if ch == "+" else -1 for ch in text)


@dataclass(frozen=True)
class SampleSet:
    """Unique spin vectors with multiplicities and energies, sorted by spins text."""

    spins: tuple[tuple[int, ...], ...]
    counts: tuple[int, ...]
    energies: tuple[float, ...]
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_counts(cls, instance: CubicIsing, counts: Mapping[tuple[int, ...], int], provenance: dict | None = None) -> "SampleSet":
        items = sorted(((spins_to_text(s), tuple(s), int(c)) for s, c in counts.items() if c > 0), key=lambda t: t[0])
        spins = tuple(t[1] for t in items)
        mult = tuple(t[2] for t in items)
        if any(c <= 0 for c in mult):
            raise ValueError("multiplicities must be positive")
        energies = tuple(float(e) for e in evaluate_many(instance, np.array(spins))) if spins else ()
        return cls(spins, mult, energies, dict(provenance or {}))

    @classmethod
    def from_array(cls, instance: CubicIsing, samples: np.ndarray, provenance: dict | None = None) -> "SampleSet":
        counts: dict[tuple[int, ...], int] = {}
        uniq, mult = np.unique(np.asarray(samples, dtype=np.int64), axis=0, return_counts=True)
        for row, c in zip(uniq, mult):
            counts[tuple(int(v) for v in row)] = int(c)
        return cls.from_counts(instance, counts, provenance)

    @property
    def shots(self) -> int:
        return int(sum(self.counts))

    def mean_energy(self) -> float:
        return float(np.dot(self.counts, self.energies) / self.shots)

    def min_energy(self) -> float:
        return float(min(self.energies))

    def std_energy(self) -> float:
        e = np.asarray(self.energies)
        w = np.asarray(self.counts, dtype=np.float64)
        mu = np.dot(w, e) / w.sum()
        return float(np.sqrt(np.dot(w, (e - mu) ** 2) / w.sum()))

    def stderr(self) -> float:
        return self.std_energy() / np.sqrt(self.shots)

    def energy_array(self) -> np.ndarray:
        return np.repeat(np.asarray(self.energies), self.counts)


def random_baseline(instance: CubicIsing, shots: int, seed: int) -> SampleSet:
    """Independent fair +/-1 spins, ``shots`` times."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    samples = 1 - 2 * rng.integers(0, 2, size=(shots, instance.num_vars))
    return SampleSet.from_array(instance, samples, {"method": "random", "shots": shots, "seed": int(seed)})


def samples_to_csv(ss: SampleSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["spins", "multiplicity", "energy"])
    for s, c, e in zip(ss.spins, ss.counts, ss.energies):
        w.writerow([spins_to_text(s), c, repr(float(e))])
    return buf.getvalue()


def save_samples(ss: SampleSet, path: str | Path) -> None:
    path = Path(path)
    path.write_text(samples_to_csv(ss))
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(ss.provenance, indent=2, sort_keys=True) + "\n")


def load_samples(path: str | Path, instance: CubicIsing | None = None) -> SampleSet:
    """Read a sample CSV and its sidecar; energies are re-derived when ``instance`` is given."""
    path = Path(path)
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    side = path.with_suffix(path.suffix + ".json")
    prov = json.loads(side.read_text()) if side.exists() else {}
    counts = {text_to_spins(r["spins"]): int(r["multiplicity"]) for r in rows}
    if instance is not None:
        return SampleSet.from_counts(instance, counts, prov)
    items = sorted(rows, key=lambda r: r["spins"])
    return SampleSet(
        tuple(text_to_spins(r["spins"]) for r in items),
        tuple(int(r["multiplicity"]) for r in items),
        tuple(float(r["energy"]) for r in items),
        prov,
    )


# -- instance file ------------------------------------------------------------

def _fmt(c: float) -> str:
    return str(int(c)) if float(c).is_integer() else repr(float(c))


def dumps_instance(instance: CubicIsing, lattice_file: str) -> str:
    lines = ["cubicising v1", f"lattice {lattice_file}"]
    lines += [f"lin {v} {_fmt(c)}" for v, c in sorted(instance.linear.items())]
    lines += [f"quad {u} {v} {_fmt(c)}" for (u, v), c in sorted(instance.quadratic.items())]
    lines += [f"cubic {a} {m} {b} {_fmt(c)}" for (a, m, b), c in sorted(instance.cubic.items())]
    return "\n".join(lines) + "\n"


def loads_instance(text: str, num_vars: int | None = None) -> tuple[CubicIsing, str]:
    """Parse instance text; returns the instance and the referenced lattice file."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != "cubicising v1":
        raise ValueError("missing 'cubicising v1' header")
    if len(lines) < 2 or not lines[1].startswith("lattice "):
        raise ValueError("second line must be 'lattice <file>'")
    lattice_file = lines[1].split(None, 1)[1]
    lin: dict[int, float] = {}
    quad: dict[Pair, float] = {}
    cub: dict[Site, float] = {}
    for ln in lines[2:]:
        p = ln.split()
        if p[0] == "lin" and len(p) == 3:
            lin[int(p[1])] = float(p[2])
        elif p[0] == "quad" and len(p) == 4:
            quad[_edge(int(p[1]), int(p[2]))] = float(p[3])
        elif p[0] == "cubic" and len(p) == 5:
            cub[(int(p[1]), int(p[2]), int(p[3]))] = float(p[4])
        else:
            raise ValueError(f"cannot parse line: {ln!r}")
    if num_vars is None:
        keys = list(lin) + [v for e in quad for v in e] + [v for t in cub for v in t]
        num_vars = max(keys) + 1 if keys else 0
    inst = CubicIsing(num_vars, lin, dict(sorted(quad.items())), dict(sorted(cub.items())), Path(lattice_file).stem)
    inst.check()
    return inst, lattice_file


def save_instance(instance: CubicIsing, path: str | Path, lattice_file: str) -> None:
    Path(path).write_text(dumps_instance(instance, lattice_file))


def load_instance(path: str | Path, lattice: HeavyHexLattice | None = None) -> tuple[CubicIsing, str]:
    inst, lattice_file = loads_instance(Path(path).read_text(), lattice.num_nodes if lattice else None)
    if lattice is not None:
        inst = instance_for_lattice(lattice, inst.linear, inst.quadratic, inst.cubic)
    return inst, lattice_file
