"""Pause schedules, the annealing parameter grid, and a classical annealing proxy.

The proxy is schedule-driven Metropolis sampling, not quantum dynamics.  The
anneal fraction s(t) read from a schedule sets an effective inverse
temperature ``beta_max * B(s) / (A(s) + eps)`` (capped at ``beta_max``), with
``A(s) = 1 - s`` and ``B(s) = s`` by default.  Physical time maps to Monte
Carlo effort through ``sweeps_per_us``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .instance import CubicIsing, SampleSet
from .reduction import ReducedIsing

ANNEAL_TIMES = (10, 100, 1000, 2000)
FRACTIONS = tuple(Fraction(k, 10) for k in range(1, 10))
DEFAULT_READS = 500

Number = float | Fraction


@dataclass(frozen=True)
class AnnealSchedule:
    breakpoints: tuple[tuple[Number, Number], ...]

    def __post_init__(self):
        bp = self.breakpoints
        if len(bp) < 2 or bp[0] != (0, 0) or bp[-1][1] != 1:
            raise ValueError("schedule must start at (0, 0) and end at s = 1")
        for (t0, s0), (t1, s1) in zip(bp, bp[1:]):
            if not t1 > t0:
                raise ValueError("breakpoint times must be strictly increasing")
            if s1 < s0:
                raise ValueError("anneal fraction must be non-decreasing")

    @property
    def total_time(self) -> Number:
        return self.breakpoints[-1][0]

    def s_at(self, t: np.ndarray) -> np.ndarray:
        ts = np.array([float(p[0]) for p in self.breakpoints])
        ss = np.array([float(p[1]) for p in self.breakpoints])
        return np.interp(t, ts, ss)

    def slopes(self) -> list[Number]:
        return [(s1 - s0) / (t1 - t0) for (t0, s0), (t1, s1) in zip(self.breakpoints, self.breakpoints[1:])]


def build_pause_schedule(T: Number, s_p: Number, f: Number, exact: bool = False) -> AnnealSchedule:
    """Linear ramp with a flat pause at ``s_p`` lasting ``f * T``.

    Breakpoints ``(0, 0), (s_p (T - fT), s_p), (s_p (T - fT) + fT, s_p), (T, 1)``;
    both ramps then have slope ``1 / (T - fT)``.  ``f = 0`` collapses to the
    plain ramp ``(0, 0), (T, 1)``.  ``exact=True`` keeps Fractions.
    """
    if exact:
        T, s_p, f = Fraction(T), Fraction(s_p), Fraction(f)
    if not T > 0:
        raise ValueError("anneal time must be positive")
    if not 0 < s_p < 1:
        raise ValueError("pause location must lie strictly between 0 and 1")
    if not 0 <= f < 1:
        raise ValueError("pause fraction must lie in [0, 1)")
    ramp = T - f * T
    a = s_p * ramp
    if f == 0 or a + f * T == a:
        # a pause too short to separate two float breakpoints is no pause
        return AnnealSchedule(((0, 0), (T, 1)))
    return AnnealSchedule(((0, 0), (a, s_p), (a + f * T, s_p), (T, 1)))


@dataclass(frozen=True)
class QAParams:
    anneal_time: int
    pause_location: Fraction
    pause_fraction: Fraction
    reads: int = DEFAULT_READS

    def schedule(self, exact: bool = False) -> AnnealSchedule:
        if exact:
            return build_pause_schedule(self.anneal_time, self.pause_location, self.pause_fraction, exact=True)
        return build_pause_schedule(float(self.anneal_time), float(self.pause_location), float(self.pause_fraction))


def qa_param_grid(reads: int = DEFAULT_READS) -> list[QAParams]:
    """All 9 pause locations x 9 pause fractions x 4 anneal times."""
    return [QAParams(T, sp, f, reads) for T, sp, f in itertools.product(ANNEAL_TIMES, FRACTIONS, FRACTIONS)]


def schedule_to_csv(schedule: AnnealSchedule) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time_us", "s"])
    for t, s in schedule.breakpoints:
        w.writerow([repr(float(t)), repr(float(s))])
    return buf.getvalue()


def schedule_from_csv(text: str) -> AnnealSchedule:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    return AnnealSchedule(tuple((float(t), float(s)) for t, s in rows))


def load_energy_curves(path: str | Path) -> tuple[Callable, Callable]:
    """A(s) and B(s) from a CSV with columns s, A, B (interpolated linearly)."""
    rows = list(csv.DictReader(io.StringIO(Path(path).read_text())))
    s = np.array([float(r["s"]) for r in rows])
    A = np.array([float(r["A"]) for r in rows])
    B = np.array([float(r["B"]) for r in rows])
    return (lambda x: np.interp(x, s, A)), (lambda x: np.interp(x, s, B))


@dataclass(frozen=True)
class ProxyConfig:
    sweeps_per_us: float = 10.0
    beta_max: float = 30.0
    eps: float = 1e-9
    A: Callable | None = None
    B: Callable | None = None
    chunk: int = 256

    def beta(self, s: np.ndarray) -> np.ndarray:
        A = self.A(s) if self.A else 1.0 - s
        B = self.B(s) if self.B else s
        return np.minimum(self.beta_max * B / (A + self.eps), self.beta_max)


def load_proxy_config(path: str | Path) -> ProxyConfig:
    """``key=value`` file with keys sweeps_per_us, beta_max, eps, curves."""
    kw: dict = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        key, _, val = ln.partition("=")
        key, val = key.strip(), val.strip()
        if key in ("sweeps_per_us", "beta_max", "eps"):
            kw[key] = float(val)
        elif key == "curves":
            kw["A"], kw["B"] = load_energy_curves(val)
        else:
            raise ValueError(f"unknown proxy config key {key!r}")
    return ProxyConfig(**kw)


def read_seed(seed: int, read: int) -> int:
    digest = hashlib.sha256(f"anneal:{int(seed)}:{int(read)}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def sweep_betas(schedule: AnnealSchedule, config: ProxyConfig) -> np.ndarray:
    sweeps = max(1, int(round(float(schedule.total_time) * config.sweeps_per_us)))
    t = (np.arange(sweeps) + 0.5) * (float(schedule.total_time) / sweeps)
    return config.beta(schedule.s_at(t))


def _sweep_block_numpy(S: np.ndarray, h: np.ndarray, J: np.ndarray, thresh: np.ndarray) -> None:
    n = S.shape[1]
    for t in range(thresh.shape[1]):
        th = thresh[:, t, :]
        for i in range(n):
            dE = -2.0 * S[:, i] * (h[i] + S @ J[:, i])
            S[:, i] = np.where(dE < th[:, i], -S[:, i], S[:, i])


_NUMBA_KERNEL: list = []


def _numba_kernel():
    """Compiled sweep kernel, or None without numba.  Compiled on first use."""
    if not _NUMBA_KERNEL:
        try:
            import numba
        except ImportError:
            _NUMBA_KERNEL.append(None)
        else:
            @numba.njit(cache=False)
            def kernel(S, F, J, thresh):
                R, T, n = thresh.shape
                for r in range(R):
                    for t in range(T):
                        for i in range(n):
                            dE = -2.0 * S[r, i] * F[r, i]
                            if dE < thresh[r, t, i]:
                                S[r, i] = -S[r, i]
                                d = 2.0 * S[r, i]
                                for j in range(n):
                                    F[r, j] += d * J[i, j]

            _NUMBA_KERNEL.append(kernel)
    return _NUMBA_KERNEL[0]


def _sweep_block_numba(S: np.ndarray, F: np.ndarray, J: np.ndarray, thresh: np.ndarray) -> None:
    _numba_kernel()(S, F, J, np.ascontiguousarray(thresh))


def anneal_sample(
    reduced: ReducedIsing,
    schedule: AnnealSchedule,
    reads: int,
    seed: int,
    config: ProxyConfig = ProxyConfig(),
    backend: str = "auto",
) -> SampleSet:
    """Metropolis proxy over the reduced variables, one independent chain per read.

    Each read owns a Philox stream keyed by ``read_seed(seed, read)`` that
    supplies its initial spins and one uniform per spin per sweep, so a
    read's trajectory does not depend on how many other reads run alongside.
    Energies in the result include the reduced offset.

    ``backend`` is ``"numpy"``, ``"numba"`` or ``"auto"`` (numba when it is
    installed).  Both consume identical random numbers and agree exactly on
    integer-valued problems.
    """
    if backend not in ("auto", "numpy", "numba"):
        raise ValueError("backend must be auto, numpy or numba")
    if backend == "numba" and _numba_kernel() is None:
        raise RuntimeError("numba is not installed")
    if reads < 1:
        raise ValueError("reads must be >= 1")
    n = reduced.num_vars
    h = np.zeros(n)
    for v, c in reduced.linear.items():
        h[v] = c
    J = np.zeros((n, n))
    for (a, b), c in reduced.quadratic.items():
        J[a, b] += c
        J[b, a] += c
    betas = sweep_betas(schedule, config)
    gens = [np.random.Generator(np.random.Philox(key=read_seed(seed, r))) for r in range(reads)]
    S = np.stack([1 - 2 * g.integers(0, 2, size=n) for g in gens]).astype(np.float64) if n else np.zeros((reads, 0))
    use_numba = _numba_kernel() is not None if backend == "auto" else backend == "numba"
    F = h[None, :] + S @ J
    for start in range(0, len(betas), config.chunk):
        block = betas[start : start + config.chunk]
        U = np.stack([g.random((len(block), n)) for g in gens])
        # accept a move raising the energy by dE iff u < exp(-beta dE), i.e. dE < -log(u) / beta
        with np.errstate(divide="ignore"):
            thresh = -np.log(U) / block[None, :, None]
        if use_numba:
            _sweep_block_numba(S, F, J, thresh)
        else:
            _sweep_block_numpy(S, h, J, thresh)
    inst = reduced.as_instance()
    out = SampleSet.from_array(inst, S.astype(np.int64), {
        "method": "anneal-proxy",
        "reads": int(reads),
        "seed": int(seed),
        "schedule": [[float(t), float(s)] for t, s in schedule.breakpoints],
        "sweeps": int(len(betas)),
        "beta_max": config.beta_max,
        "sweeps_per_us": config.sweeps_per_us,
        "readout_thermalization_us": 0,
        "programming_thermalization_us": 0,
    })
    return SampleSet(out.spins, out.counts, tuple(e + reduced.offset for e in out.energies), out.provenance)


def anneal_sample_instance(instance: CubicIsing, schedule: AnnealSchedule, reads: int, seed: int, config: ProxyConfig = ProxyConfig()) -> SampleSet:
    """Proxy sampling directly on a quadratic instance (no offset)."""
    red = ReducedIsing(instance.num_vars, instance.num_vars, dict(instance.linear), dict(instance.quadratic))
    if instance.cubic:
        raise ValueError("reduce cubic instances first")
    return anneal_sample(red, schedule, reads, seed, config)


def project_samples(samples: SampleSet, instance: CubicIsing, reduced: ReducedIsing) -> SampleSet:
    """Drop slack spins and re-evaluate on the original cubic instance."""
    if reduced.num_original != instance.num_vars:
        raise ValueError("reduced instance does not match the original")
    slack_ids = sorted(v for e in reduced.slack_registry.values() for v in (e.s1, e.s2))
    if slack_ids != list(range(reduced.num_original, reduced.num_vars)):
        raise ValueError("slack registry does not cover the slack variables")
    counts: dict[tuple[int, ...], int] = {}
    for s, c in zip(samples.spins, samples.counts):
        if len(s) != reduced.num_vars:
            raise ValueError("sample width does not match the reduced instance")
        key = tuple(s[: reduced.num_original])
        counts[key] = counts.get(key, 0) + c
    prov = dict(samples.provenance, projected=True)
    return SampleSet.from_counts(instance, counts, prov)
