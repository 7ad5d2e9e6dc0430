"""Cubic-to-quadratic order reduction with two slack spins per cubic term.

Gadget variables are indexed ``0..4`` as ``(x1, x2, x3, s1, s2)``: the first
corner neighbor, the bridge center, the second corner neighbor, then the
slacks.  The gadget energy is
``E(x, s) = sum_i h_i v_i + sum_(i,j) J_ij v_i v_j`` and its effective energy
on the originals is ``g(x) = min_s E(x, s)``.

The search only keeps *exact* gadgets, where ``g(x) = sign x1 x2 x3 + const``
for all eight original assignments.  Exactness is what lets a reduced
instance reproduce the cubic instance's energies (not only its argmin) once a
constant offset is added back.

Supports never couple x1 with x3 (the two corners are not adjacent on the
annealer) and never couple the slacks to each other.  Variant A ties ``s1``
to all three originals and ``s2`` to the corners; variant B swaps the slack
roles.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .instance import CubicIsing, Pair, evaluate_many

X1, X2, X3, S1, S2 = range(5)
ORIGINALS = (X1, X2, X3)
SLACKS = (S1, S2)
VAR_NAMES = ("x1", "x2", "x3", "s1", "s2")

ORIGINAL_PAIRS = ((X1, X2), (X2, X3))
SUPPORTS: dict[str, tuple[Pair, ...]] = {
    "A": ((X1, S1), (X2, S1), (X3, S1), (X1, S2), (X3, S2)) + ORIGINAL_PAIRS,
    "B": ((X1, S1), (X3, S1), (X1, S2), (X2, S2), (X3, S2)) + ORIGINAL_PAIRS,
}


class GadgetNotFound(LookupError):
    pass


@dataclass(frozen=True)
class Gadget:
    sign: int
    variant: str
    linear: dict[int, int]
    quadratic: dict[Pair, int]
    support: tuple[Pair, ...] = ()

    def energy(self, v: tuple[int, ...]) -> int:
        e = sum(c * v[i] for i, c in self.linear.items())
        e += sum(c * v[i] * v[j] for (i, j), c in self.quadratic.items())
        return int(e)

    def effective(self) -> dict[tuple[int, int, int], int]:
        """g(x) for the eight original assignments, exact integers."""
        out = {}
        for x in itertools.product((1, -1), repeat=3):
            out[x] = min(self.energy(x + s) for s in itertools.product((1, -1), repeat=2))
        return out

    def constant(self) -> int:
        g = self.effective()
        return (sum(g.values())) // 8

    def flipped(self, var: int) -> "Gadget":
        """The same gadget with variable ``var`` negated.

        Flipping one original variable implements the opposite cubic sign.
        """
        lin = {i: (-c if i == var else c) for i, c in self.linear.items()}
        quad = {p: (-c if var in p else c) for p, c in self.quadratic.items()}
        sign = -self.sign if var in ORIGINALS else self.sign
        return Gadget(sign, self.variant, lin, quad, self.support)


@dataclass(frozen=True)
class Verification:
    passed: bool
    reason: str
    witness: tuple[int, ...] | None
    ground_value: int | None
    table: tuple[tuple[tuple[int, ...], int], ...]


def _structure_ok(g: Gadget) -> str | None:
    for i in g.linear:
        if not 0 <= i < 5:
            return f"linear term on unknown variable {i}"
    for i, j in g.quadratic:
        if not (0 <= i < j < 5):
            return f"bad pair {(i, j)}"
    pairs = {p for p, c in g.quadratic.items() if c != 0}
    for s in SLACKS:
        if all(((min(o, s), max(o, s)) in pairs) for o in ORIGINALS) and {(X1, X2), (X2, X3), (X1, X3)} <= pairs:
            return "slack and originals form a 4-clique"
    return None


def verify_gadget(gadget: Gadget) -> Verification:
    """Exhaustive 32-state check with exact integer arithmetic.

    Passes iff the minimizers of g are exactly the four assignments with
    ``sign x1 x2 x3 = -1``, they share one value, and every other assignment
    is strictly higher.
    """
    table = tuple((v, gadget.energy(v)) for v in itertools.product((1, -1), repeat=5))
    bad = _structure_ok(gadget)
    if bad:
        return Verification(False, bad, None, None, table)
    g = gadget.effective()
    ground = [x for x in g if gadget.sign * x[0] * x[1] * x[2] == -1]
    excited = [x for x in g if x not in ground]
    gval = g[ground[0]]
    for x in ground:
        if g[x] != gval:
            return Verification(False, "ground values differ", x, gval, table)
    for x in excited:
        if g[x] <= gval:
            return Verification(False, "excited assignment not strictly above ground", x, gval, table)
    return Verification(True, "ok", None, gval, table)


def _fourier(m: np.ndarray) -> dict[tuple[int, ...], np.ndarray]:
    """8 * Fourier coefficients of functions on {+1,-1}^3 (rows of ``m``)."""
    X = np.array(list(itertools.product((1, -1), repeat=3)))
    out = {}
    for k in range(4):
        for S in itertools.combinations(range(3), k):
            chi = np.prod(X[:, list(S)], axis=1) if S else np.ones(8, dtype=np.int64)
            out[S] = m @ chi
    return out


def derive_gadget(sign: int, bound: int, support: tuple[Pair, ...], variant: str = "") -> Gadget:
    """First exact gadget on ``support`` with coefficients in ``[-bound, bound]``.

    The slack part (slack fields plus slack couplers on ``support``) is
    enumerated in lexicographic order with values ascending from ``-bound``.
    For each candidate, ``m(x) = min_s (slack part)`` is expanded in the
    parity basis; the candidate is kept when its cubic coefficient equals
    ``sign`` and every lower-order coefficient is an integer that the
    original part can cancel within the bound and the support.  The original
    part is then exactly the negated lower-order expansion.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    support = tuple(sorted({(min(p), max(p)) for p in support}))
    slack_pairs = [p for p in support if p[1] in SLACKS and p[0] in ORIGINALS]
    if any(p[0] in SLACKS for p in support):
        raise ValueError("slack-slack couplers are not supported")
    orig_pairs = {p for p in support if p[1] in ORIGINALS}
    if bound < 1:
        raise GadgetNotFound(f"no exact gadget with bound {bound}")
    vals = np.arange(-bound, bound + 1, dtype=np.int64)
    nparam = 2 + len(slack_pairs)
    grid = np.array(list(itertools.product(vals, repeat=nparam)), dtype=np.int64)
    X = np.array(list(itertools.product((1, -1), repeat=3)), dtype=np.int64)
    field_on = {S1: grid[:, 0:1] * np.ones((1, 8), dtype=np.int64), S2: grid[:, 1:2] * np.ones((1, 8), dtype=np.int64)}
    for col, (o, s) in enumerate(slack_pairs, start=2):
        field_on[s] = field_on[s] + grid[:, col : col + 1] * X[None, :, o]
    m = None
    for s1, s2 in itertools.product((1, -1), repeat=2):
        e = s1 * field_on[S1] + s2 * field_on[S2]
        m = e if m is None else np.minimum(m, e)
    F = _fourier(m)
    ok = F[(0, 1, 2)] == 8 * sign
    for S, f in F.items():
        if len(S) in (1, 2):
            ok &= f % 8 == 0
            ok &= np.abs(f // 8) <= bound
            if len(S) == 2 and S not in orig_pairs:
                ok &= f == 0
    hits = np.nonzero(ok)[0]
    if len(hits) == 0:
        raise GadgetNotFound(f"no exact gadget for sign {sign} with bound {bound} on support {support}")
    i = int(hits[0])
    linear = {S1: int(grid[i, 0]), S2: int(grid[i, 1])}
    quad: dict[Pair, int] = {p: int(grid[i, col]) for col, p in enumerate(slack_pairs, start=2)}
    for o in ORIGINALS:
        linear[o] = -int(F[(o,)][i] // 8)
    for p in sorted(orig_pairs):
        quad[p] = -int(F[p][i] // 8)
    linear = dict(sorted(linear.items()))
    quad = dict(sorted(quad.items()))
    return Gadget(sign, variant, linear, quad, support)


def derive_standard_gadgets(bound: int = 2) -> dict[tuple[int, str], Gadget]:
    return {(s, v): derive_gadget(s, bound, SUPPORTS[v], v) for v in ("A", "B") for s in (1, -1)}


# -- gadget fixture file --------------------------------------------------------

def _pm(v: int) -> str:
    return "+" if v == 1 else "-"


def dumps_gadget(g: Gadget) -> str:
    ver = verify_gadget(g)
    lines = [
        "gadget v1",
        f"sign {g.sign:+d}",
        f"variant {g.variant}",
        "support " + " ".join(f"{VAR_NAMES[i]}-{VAR_NAMES[j]}" for i, j in g.support),
        "linear " + " ".join(f"{VAR_NAMES[i]}={c}" for i, c in sorted(g.linear.items())),
        "quadratic " + " ".join(f"{VAR_NAMES[i]}-{VAR_NAMES[j]}={c}" for (i, j), c in sorted(g.quadratic.items())),
        f"verified {'pass' if ver.passed else 'fail'} ground {ver.ground_value}",
        "# x1 x2 x3 s1 s2 energy",
    ]
    for v, e in ver.table:
        lines.append("row " + " ".join(_pm(s) for s in v) + f" {e}")
    return "\n".join(lines) + "\n"


def loads_gadgets(text: str) -> list[Gadget]:
    out = []
    for block in text.split("gadget v1")[1:]:
        fields: dict[str, str] = {}
        for ln in block.strip().splitlines():
            if ln.startswith(("#", "row")):
                continue
            key, _, rest = ln.partition(" ")
            fields[key] = rest.strip()
        idx = {n: i for i, n in enumerate(VAR_NAMES)}

        def pair(tok: str) -> Pair:
            a, b = tok.split("-")
            return (idx[a], idx[b])

        lin = {idx[k]: int(v) for k, v in (t.split("=") for t in fields["linear"].split())}
        quad = {pair(k): int(v) for k, v in (t.split("=") for t in fields["quadratic"].split())}
        support = tuple(pair(t) for t in fields["support"].split())
        out.append(Gadget(int(fields["sign"]), fields["variant"], lin, quad, support))
    return out


def frozen_gadgets() -> dict[tuple[int, str], Gadget]:
    text = resources.files("heavyhex_qa").joinpath("data/gadgets.txt").read_text()
    return {(g.sign, g.variant): g for g in loads_gadgets(text)}


# -- reduction ------------------------------------------------------------------

@dataclass(frozen=True)
class SlackEntry:
    s1: int
    s2: int
    variant: str


@dataclass(frozen=True)
class ReducedIsing:
    """Quadratic Ising over originals and slacks; true energy adds ``offset``.

    Zero-coefficient entries are kept for gadget couplers so the coupler
    structure stays visible to the embedding code even on terms that carry
    no weight.
    """

    num_vars: int
    num_original: int
    linear: dict[int, float]
    quadratic: dict[Pair, float]
    offset: float = 0.0
    slack_registry: dict[tuple[int, int, int], SlackEntry] = field(default_factory=dict)
    lattice_ref: str = ""

    def as_instance(self) -> CubicIsing:
        return CubicIsing(self.num_vars, dict(self.linear), dict(self.quadratic), {}, self.lattice_ref)

    def energies(self, spins: np.ndarray) -> np.ndarray:
        return evaluate_many(self.as_instance(), spins) + self.offset

    def energy(self, spins) -> float:
        return float(self.energies(np.asarray(spins)[None, :])[0])

    def variables(self) -> list[int]:
        return list(range(self.num_vars))


def reduce_instance(instance: CubicIsing, gadgets: Mapping[tuple[int, str], Gadget] | None = None) -> ReducedIsing:
    """Swap each cubic term for a scaled exact gadget.

    Sites are ranked by center id; even ranks use variant A and odd ranks
    variant B.  Site of rank ``k`` gets slacks ``n + 2k`` and ``n + 2k + 1``
    where ``n`` is the original variable count.  A term ``c x1 x2 x3`` uses
    the gadget of sign ``sign(c)`` scaled by ``|c|``; a zero coefficient
    still reserves its slacks and couplers with zero weight.
    """
    gadgets = dict(gadgets or frozen_gadgets())
    n = instance.num_vars
    linear: dict[int, float] = {v: float(c) for v, c in instance.linear.items()}
    quad: dict[Pair, float] = {p: float(c) for p, c in instance.quadratic.items()}
    offset = 0.0
    registry: dict[tuple[int, int, int], SlackEntry] = {}
    sites = sorted(instance.cubic, key=lambda t: (t[1], t))
    for rank, site in enumerate(sites):
        c = instance.cubic[site]
        variant = "A" if rank % 2 == 0 else "B"
        sign = -1 if c < 0 else 1
        if (sign, variant) not in gadgets:
            raise KeyError(f"missing gadget for sign {sign:+d} variant {variant}")
        g = gadgets[(sign, variant)]
        scale = abs(float(c))
        s1, s2 = n + 2 * rank, n + 2 * rank + 1
        registry[site] = SlackEntry(s1, s2, variant)
        var = (site[0], site[1], site[2], s1, s2)
        for i, h in g.linear.items():
            linear[var[i]] = linear.get(var[i], 0.0) + scale * h
        for (i, j), J in g.quadratic.items():
            key = (min(var[i], var[j]), max(var[i], var[j]))
            quad[key] = quad.get(key, 0.0) + scale * J
        offset -= scale * g.constant()
    return ReducedIsing(
        n + 2 * len(sites),
        n,
        dict(sorted(linear.items())),
        dict(sorted(quad.items())),
        offset + 0.0,
        registry,
        instance.lattice_ref,
    )


def project_spins(reduced: ReducedIsing, spins: np.ndarray) -> np.ndarray:
    return np.asarray(spins)[..., : reduced.num_original]


def brute_force_reduced(reduced: ReducedIsing) -> tuple[float, list[tuple[int, ...]]]:
    """Exact minimum of the reduced energy and its minimizers (full vectors)."""
    from .instance import basis_spins

    if reduced.num_vars > 24:
        raise ValueError("too many variables to enumerate")
    spins = basis_spins(reduced.num_vars)
    e = reduced.energies(spins)
    emin = float(e.min())
    return emin, sorted(tuple(int(s) for s in row) for row in spins[e == emin])


# -- export ------------------------------------------------------------------

def _fmt(c: float) -> str:
    return str(int(c)) if float(c).is_integer() else repr(float(c))


def dumps_reduced(reduced: ReducedIsing) -> str:
    lines = ["reducedising v1", f"vars {reduced.num_vars} original {reduced.num_original}", f"offset {_fmt(reduced.offset)}"]
    lines += [f"lin {v} {_fmt(c)}" for v, c in sorted(reduced.linear.items())]
    lines += [f"quad {u} {v} {_fmt(c)}" for (u, v), c in sorted(reduced.quadratic.items())]
    return "\n".join(lines) + "\n"


def registry_to_json(reduced: ReducedIsing) -> str:
    items = [
        {"site": list(site), "s1": e.s1, "s2": e.s2, "variant": e.variant}
        for site, e in sorted(reduced.slack_registry.items(), key=lambda t: t[1].s1)
    ]
    return json.dumps({"lattice": reduced.lattice_ref, "slacks": items}, indent=2) + "\n"


def loads_reduced(text: str, registry_json: str | None = None) -> ReducedIsing:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != "reducedising v1":
        raise ValueError("missing 'reducedising v1' header")
    p = lines[1].split()
    num_vars, num_original = int(p[1]), int(p[3])
    offset = float(lines[2].split()[1])
    lin: dict[int, float] = {}
    quad: dict[Pair, float] = {}
    for ln in lines[3:]:
        t = ln.split()
        if t[0] == "lin":
            lin[int(t[1])] = float(t[2])
        elif t[0] == "quad":
            quad[(int(t[1]), int(t[2]))] = float(t[3])
        else:
            raise ValueError(f"cannot parse line {ln!r}")
    registry: dict[tuple[int, int, int], SlackEntry] = {}
    ref = ""
    if registry_json:
        data = json.loads(registry_json)
        ref = data.get("lattice", "")
        for item in data["slacks"]:
            registry[tuple(item["site"])] = SlackEntry(item["s1"], item["s2"], item["variant"])
    return ReducedIsing(num_vars, num_original, lin, quad, offset, registry, ref)


def save_reduced(reduced: ReducedIsing, path: str | Path) -> None:
    path = Path(path)
    path.write_text(dumps_reduced(reduced))
    path.with_suffix(".slacks.json").write_text(registry_to_json(reduced))


def load_reduced(path: str | Path) -> ReducedIsing:
    path = Path(path)
    side = path.with_suffix(".slacks.json")
    return loads_reduced(path.read_text(), side.read_text() if side.exists() else None)
