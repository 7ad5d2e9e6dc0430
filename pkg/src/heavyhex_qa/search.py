"""Angle grids and grid searches over simulated QAOA executions."""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .instance import CubicIsing, energy_table
from .qaoa import DEFAULT_DURATIONS, AngleParams, build_qaoa_circuit, insert_ddd
from .simulator import DEFAULT_QUBIT_CAP, QubitCapError, probabilities, qaoa_state_from_table, run_statevector, sample_indices
from .topology import HeavyHexLattice


def linspace_inclusive(stop: float, num: int) -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(0.0, stop, num))


@dataclass(frozen=True)
class AngleGrid:
    """Cartesian grid in the interleaved order (gamma_1, beta_1, ..., gamma_p, beta_p)."""

    p: int
    axes: tuple[tuple[float, ...], ...]
    names: tuple[str, ...]

    def __len__(self) -> int:
        return math.prod(len(a) for a in self.axes)

    def combos(self):
        for vec in itertools.product(*self.axes):
            yield AngleParams(tuple(vec[0::2]), tuple(vec[1::2]))

    def combo(self, index: int) -> AngleParams:
        vec = []
        for axis in reversed(self.axes):
            index, r = divmod(index, len(axis))
            vec.append(axis[r])
        vec.reverse()
        return AngleParams(tuple(vec[0::2]), tuple(vec[1::2]))

    def spec_hash(self) -> str:
        blob = json.dumps({"p": self.p, "axes": [[repr(v) for v in a] for a in self.axes]})
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def angle_grid(p: int) -> AngleGrid:
    """p=1: gamma 120 points on [0, pi], beta 60 on [0, pi/2].

    p=2: gamma_1, beta_1, gamma_2 with 11 points on [0, pi] each and beta_2
    with 5 points on [0, pi/2].  Both endpoints are included on every axis.
    """
    if p == 1:
        axes = (linspace_inclusive(math.pi, 120), linspace_inclusive(math.pi / 2, 60))
        names = ("gamma1", "beta1")
    elif p == 2:
        full = linspace_inclusive(math.pi, 11)
        axes = (full, full, full, linspace_inclusive(math.pi / 2, 5))
        names = ("gamma1", "beta1", "gamma2", "beta2")
    else:
        raise ValueError("angle grids are defined for p = 1 and p = 2")
    return AngleGrid(p, axes, names)


def explicit_grid(params: Sequence[AngleParams]) -> "ExplicitGrid":
    return ExplicitGrid(tuple(params))


@dataclass(frozen=True)
class ExplicitGrid:
    """A plain list of angle combinations, for tests and custom sweeps."""

    params: tuple[AngleParams, ...]

    @property
    def p(self) -> int:
        return self.params[0].p

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for k in range(1, self.p + 1) for n in (f"gamma{k}", f"beta{k}"))

    def __len__(self) -> int:
        return len(self.params)

    def combos(self):
        return iter(self.params)

    def combo(self, index: int) -> AngleParams:
        return self.params[index]

    def spec_hash(self) -> str:
        blob = json.dumps([[repr(v) for v in p.gammas + p.betas] for p in self.params])
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def combo_seed(master_seed: int, index: int) -> int:
    """Per-combination seed: first 8 bytes of sha256 over (master, index)."""
    digest = hashlib.sha256(f"{int(master_seed)}:{int(index)}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class ComboRecord:
    index: int
    params: AngleParams
    mean_energy: float
    min_energy: float
    shots: int
    seed: int

    def angle_vector(self) -> tuple[float, ...]:
        return tuple(v for pair in zip(self.params.gammas, self.params.betas) for v in pair)


@dataclass(frozen=True)
class GridResult:
    records: tuple[ComboRecord, ...]
    best_index: int
    provenance: dict = field(default_factory=dict)

    @property
    def best(self) -> ComboRecord:
        return next(r for r in self.records if r.index == self.best_index)


def select_best(records: Sequence[ComboRecord]) -> ComboRecord:
    """Lowest mean energy; ties go to the lexicographically smallest angle vector."""
    if not records:
        raise ValueError("no records to select from")
    return min(records, key=lambda r: (r.mean_energy, r.angle_vector()))


def _combo_probabilities(lattice, instance, table, params: AngleParams, ddd: bool, durations, alignment, method: str, cap: int):
    if method == "table" and not ddd:
        return probabilities(qaoa_state_from_table(table, params.gammas, params.betas))
    circ = build_qaoa_circuit(lattice, instance, params)
    if ddd:
        circ = insert_ddd(circ, durations, alignment)
    return probabilities(run_statevector(circ, cap=cap))


def run_grid_search(
    lattice: HeavyHexLattice,
    instance: CubicIsing,
    grid,
    shots: int,
    seed: int,
    ddd: bool = False,
    durations: Mapping[str, int] = DEFAULT_DURATIONS,
    alignment: int = 1,
    method: str = "table",
    threads: int = 1,
    cap: int = DEFAULT_QUBIT_CAP,
) -> GridResult:
    """Simulate and sample every combination of ``grid``.

    ``method="circuit"`` simulates the compiled gate list for every combo.
    ``method="table"`` applies the separator as ``exp(-i gamma C)`` from a
    precomputed energy table, which is the same unitary and much faster; any
    DDD run falls back to the circuit path so the inserted gates are really
    simulated.  Sampling uses ``combo_seed(seed, index)`` either way.
    """
    if method not in ("table", "circuit"):
        raise ValueError("method must be 'table' or 'circuit'")
    n = lattice.num_nodes
    if n > cap:
        raise QubitCapError(f"{n} qubits exceeds the simulation cap of {cap}")
    table = energy_table(instance)

    def one(item):
        index, params = item
        probs = _combo_probabilities(lattice, instance, table, params, ddd, durations, alignment, method, cap)
        s = combo_seed(seed, index)
        counts = sample_indices(probs, shots, s)
        hit = np.nonzero(counts)[0]
        mean = float(np.dot(counts[hit], table[hit]) / shots)
        return ComboRecord(index, params, mean, float(table[hit].min()), shots, s)

    items = list(enumerate(grid.combos()))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, items))
    else:
        records = [one(it) for it in items]
    best = select_best(records)
    prov = {
        "seed": int(seed),
        "shots": int(shots),
        "ddd": bool(ddd),
        "method": method,
        "p": grid.p,
        "combos": len(records),
        "grid_hash": grid.spec_hash(),
        "lattice": lattice.name,
        "alignment": int(alignment),
        "durations": dict(sorted(durations.items())) if ddd else None,
    }
    return GridResult(tuple(records), best.index, prov)


def grid_result_to_csv(result: GridResult) -> str:
    p = result.records[0].params.p if result.records else 1
    names = [n for k in range(1, p + 1) for n in (f"gamma{k}", f"beta{k}")]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["combo", *names, "mean_energy", "min_energy", "shots", "seed"])
    for r in result.records:
        w.writerow([r.index, *[repr(v) for v in r.angle_vector()], repr(r.mean_energy), repr(r.min_energy), r.shots, r.seed])
    return buf.getvalue()


def save_grid_result(result: GridResult, path: str | Path) -> None:
    path = Path(path)
    path.write_text(grid_result_to_csv(result))
    side = dict(result.provenance, best_index=result.best_index)
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")


def load_grid_result(path: str | Path) -> GridResult:
    path = Path(path)
    rows = list(csv.reader(io.StringIO(path.read_text())))
    header, body = rows[0], rows[1:]
    nang = len(header) - 5
    records = []
    for row in body:
        vec = [float(v) for v in row[1 : 1 + nang]]
        params = AngleParams(tuple(vec[0::2]), tuple(vec[1::2]))
        records.append(ComboRecord(int(row[0]), params, float(row[1 + nang]), float(row[2 + nang]), int(row[3 + nang]), int(row[4 + nang])))
    side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    best = side.pop("best_index")
    return GridResult(tuple(records), best, side)
