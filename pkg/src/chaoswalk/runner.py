"""Experiment orchestration behind the command line tool.

Each experiment kind has a driver that evolves the relevant objects and
emits plain CSV series; ``run`` dispatches on the parsed config, hashes
every artifact, and writes the manifest last so its presence marks a
completed run.  Figure presets expand to ordinary config texts, so a
preset run is exactly a scripted sequence of normal runs.

Determinism contract: identical config text reproduces identical bytes
for every numeric output, independent of thread count.  Worker threads
only compute; all files are written from the driver thread in a fixed
order.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classical_walk import exact_evolve
from .coins import CoinUnitary, HarperParams, build_harper, ensemble_seeds, load_coin, sample_cue
from .config import ConfigError, ExperimentConfig, parse_config
from .harper_map import PhasePoint, coverage_fraction, phase_portrait
from .kernels import BACKEND
from .observables import (
    density_spectrum,
    fgr_fidelity,
    mp_density,
    mp_support,
    binomial_prediction,
    diffusive_time,
    distribution_distance,
    normal_prediction,
    shannon_entropy,
    variance,
    von_neumann_entropy,
)
from .walk import (
    NumericGuardError,
    PositionDistribution,
    SectorState,
    WalkConfig,
    coin_density,
    evolve,
    initial_state,
    load_sector_state,
    position_distribution,
    save_sector_state,
    sector_blocks,
    walker_density,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_FORMAT = "chaoswalk-manifest-1"
CHECKPOINT_FORMAT = "chaoswalk-checkpoint-1"
CHECKPOINT_EVERY = 500
CHECKPOINT_MIN_HORIZON = 1000
THREADS_ENV = "CHAOSWALK_THREADS"

# Entropy consistency of the two reduced densities of a pure state.
ENTROPY_MATCH_TOL = 1e-8


def thread_count() -> int:
    """Worker threads for independent jobs; the only environment knob."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(1, count)


def _format_number(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans have no CSV encoding here")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


class OutputWriter:
    """Writes artifacts under one run directory and records their hashes.

    All numeric CSV cells use 17-significant-digit decimal so written
    values round-trip exactly.  A child writer shares the parent's hash
    record, so a preset run ends with a single flat artifact list.
    """

    def __init__(self, root, _records=None, _prefix: str = ""):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._records = _records if _records is not None else {}
        self._prefix = _prefix

    def child(self, subdir: str) -> "OutputWriter":
        if not subdir or subdir == ".":
            return self
        prefix = f"{self._prefix}{subdir}/"
        return OutputWriter(self.root / subdir, self._records, prefix)

    def write_bytes(self, name: str, data: bytes) -> Path:
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self._records[self._prefix + name] = hashlib.sha256(data).hexdigest()
        return path

    def write_csv(self, name: str, header, rows) -> Path:
        lines = [",".join(header)]
        lines.extend(",".join(_format_number(cell) for cell in row) for row in rows)
        return self.write_bytes(name, ("\n".join(lines) + "\n").encode("ascii"))

    def write_json(self, name: str, payload) -> Path:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        return self.write_bytes(name, text.encode("ascii"))

    def record_existing(self, name: str) -> None:
        data = (self.root / name).read_bytes()
        self._records[self._prefix + name] = hashlib.sha256(data).hexdigest()

    def output_list(self) -> list[dict]:
        return [
            {"path": path, "sha256": digest}
            for path, digest in sorted(self._records.items())
        ]


@dataclass
class RunManifest:
    """Provenance of one completed run; written after every other file."""

    kind: str
    config_text: str
    seeds: list[int]
    wall_time_s: float
    outputs: list[dict]
    extras: dict = field(default_factory=dict)
    version: str = __version__
    backend: str = BACKEND

    def to_payload(self) -> dict:
        return {
            "format": MANIFEST_FORMAT,
            "version": self.version,
            "backend": self.backend,
            "kind": self.kind,
            "config": self.config_text,
            "seeds": self.seeds,
            "wall_time_s": self.wall_time_s,
            "extras": self.extras,
            "outputs": self.outputs,
        }


class SeriesStore:
    """Accumulated sample rows per series name, JSON round-trippable."""

    def __init__(self, data: dict | None = None):
        self.data: dict[str, list[list]] = data or {}

    def add(self, name: str, row) -> None:
        self.data.setdefault(name, []).append(list(row))

    def rows(self, name: str) -> list[list]:
        return self.data.get(name, [])


# ----------------------------------------------------------- coin assembly


def build_coin_from_config(values: dict) -> tuple[CoinUnitary, list[int]]:
    """(coin, seeds consumed) for the coin block of a config."""
    coin_type = values["coin.type"]
    m = values["coin.m"]
    if coin_type == "harper":
        params = HarperParams(g=values["coin.g"], tau=values["coin.tau"])
        return build_harper(m, params), []
    if coin_type == "cue":
        seed = values["coin.seed"]
        return sample_cue(m, seed), [seed]
    coin = load_coin(values["coin.path"])
    if coin.m != m:
        raise ConfigError(f"coin.path holds an m={coin.m} coin, config says m={m}")
    return coin, []


def _walk_config(values: dict, coin: CoinUnitary) -> WalkConfig:
    return WalkConfig(
        coin=coin,
        n_sites=values["lattice.n"],
        initial_coin=values["initial.coin_index"],
        initial_site=values["initial.site"],
    )


# ------------------------------------------------- sampled evolution core


def sample_times(t_max: int, every: int) -> list[int]:
    times = list(range(0, t_max + 1, every))
    if times[-1] != t_max:
        times.append(t_max)
    return times


def _checkpoint_paths(t: int) -> tuple[str, str]:
    return (
        f"checkpoints/state_t{t:07d}.sec",
        f"checkpoints/state_t{t:07d}.json",
    )


def _latest_checkpoint(writer: OutputWriter, t_max: int):
    """(state_path, sidecar_path, t) of the newest usable checkpoint, or None."""
    best = None
    for t in range(CHECKPOINT_EVERY, t_max, CHECKPOINT_EVERY):
        state_name, sidecar_name = _checkpoint_paths(t)
        if (writer.root / state_name).exists() and (writer.root / sidecar_name).exists():
            best = (writer.root / state_name, writer.root / sidecar_name, t)
    return best


def run_evolution(
    writer: OutputWriter,
    config: WalkConfig,
    t_max: int,
    every: int,
    sample_fn,
    resume: bool = False,
) -> tuple[SeriesStore, SectorState]:
    """Evolve, calling ``sample_fn(state, store)`` at each sample time.

    Long horizons (t_max >= 1000) checkpoint the sector state and the
    samples gathered so far every 500 steps; with ``resume`` the newest
    checkpoint is loaded and only the remaining steps are computed, with
    output rows spliced so the files come out byte-identical to a fresh
    run.
    """
    blocks = sector_blocks(config)
    state = initial_state(config)
    store = SeriesStore()
    sampled_to = -1

    checkpointing = t_max >= CHECKPOINT_MIN_HORIZON
    samples = sample_times(t_max, every)
    events = set(samples)
    if checkpointing:
        events.update(range(CHECKPOINT_EVERY, t_max, CHECKPOINT_EVERY))

    if resume:
        found = _latest_checkpoint(writer, t_max)
        if found is not None:
            state_path, sidecar_path, t0 = found
            sidecar = json.loads(sidecar_path.read_text(encoding="ascii"))
            loaded = load_sector_state(state_path, origin=config.initial_site)
            if (
                sidecar.get("format") == CHECKPOINT_FORMAT
                and loaded.n_sites == config.n_sites
                and loaded.m == config.coin.m
                and loaded.t == t0
            ):
                state = loaded
                store = SeriesStore(sidecar["series"])
                sampled_to = int(sidecar["sampled_to"])
                logger.info("resuming from checkpoint at t=%d", t0)
                # Earlier checkpoints were written by the interrupted
                # run; keep them in this run's artifact inventory.
                for done in range(CHECKPOINT_EVERY, t0 + 1, CHECKPOINT_EVERY):
                    for done_name in _checkpoint_paths(done):
                        if (writer.root / done_name).exists():
                            writer.record_existing(done_name)
            else:
                logger.warning("checkpoint at t=%d does not match the config, ignoring", t0)

    sample_set = set(samples)
    for t in sorted(events):
        if t < state.t:
            continue
        state = evolve(state, blocks, t - state.t)
        if t in sample_set and t > sampled_to:
            sample_fn(state, store)
            sampled_to = t
        if checkpointing and t % CHECKPOINT_EVERY == 0 and 0 < t < t_max:
            state_name, sidecar_name = _checkpoint_paths(t)
            state_path = writer.root / state_name
            state_path.parent.mkdir(parents=True, exist_ok=True)
            save_sector_state(state, state_path)
            writer.record_existing(state_name)
            writer.write_json(
                sidecar_name,
                {
                    "format": CHECKPOINT_FORMAT,
                    "sampled_to": sampled_to,
                    "series": store.data,
                },
            )
    return store, state


# ------------------------------------------------------------------ drivers


def _snapshot_times(values: dict) -> set[int]:
    t_max = values["run.t_max"]
    every = values.get("run.snapshot_every") or values["run.sample_every"]
    return set(sample_times(t_max, every))


def _drive_walk(cfg: ExperimentConfig, writer: OutputWriter, resume: bool):
    coin, seeds = build_coin_from_config(cfg.values)
    walk_cfg = _walk_config(cfg.values, coin)
    snapshots = _snapshot_times(cfg.values)

    def sample(state: SectorState, store: SeriesStore) -> None:
        dist = position_distribution(state)
        if state.t in snapshots:
            labels, probs = dist.centered()
            for label, p in zip(labels, probs):
                store.add("p_nt", (state.t, int(label), p))
        store.add("variance", (state.t, variance(dist)))

    store, final = run_evolution(
        writer, walk_cfg, cfg["run.t_max"], cfg["run.sample_every"], sample, resume
    )
    writer.write_csv("p_nt.csv", ("t", "n_centered", "p"), store.rows("p_nt"))
    writer.write_csv("variance.csv", ("t", "value"), store.rows("variance"))
    if "cmx" in cfg["outputs.formats"]:
        from .linalg import save_cmatrix

        for name, rho in (
            ("rho_coin_final.cmx", coin_density(final)),
            ("rho_walker_final.cmx", walker_density(final, basis="position")),
        ):
            save_cmatrix(writer.root / name, rho.matrix)
            writer.record_existing(name)
    return seeds, {"final_t": final.t}


def _drive_fidelity(cfg: ExperimentConfig, writer: OutputWriter, resume: bool):
    coin, seeds = build_coin_from_config(cfg.values)
    walk_cfg = _walk_config(cfg.values, coin)
    n = walk_cfg.n_sites
    deltas = cfg["fidelity.deltas"]
    for delta in deltas:
        if not 0 <= delta < n:
            raise ConfigError(f"fidelity.deltas entry {delta} outside 0..{n - 1}")

    def sample(state: SectorState, store: SeriesStore) -> None:
        base = state.vectors[0]
        for delta in deltas:
            overlap = complex(np.vdot(base, state.vectors[delta]))
            folded = min(delta, n - delta)
            ref_cos, ref_exp = fgr_fidelity(folded, n, state.t)
            store.add(
                "fidelity",
                (
                    state.t,
                    delta,
                    folded,
                    overlap.real,
                    overlap.imag,
                    abs(overlap),
                    ref_cos,
                    ref_exp,
                ),
            )

    store, final = run_evolution(
        writer, walk_cfg, cfg["run.t_max"], cfg["run.sample_every"], sample, resume
    )
    writer.write_csv(
        "fidelity.csv",
        ("t", "delta", "folded_delta", "re", "im", "abs", "ref_cos", "ref_exp"),
        store.rows("fidelity"),
    )
    return seeds, {"deltas": list(deltas), "final_t": final.t}


def _drive_entropy(cfg: ExperimentConfig, writer: OutputWriter, resume: bool):
    coin, seeds = build_coin_from_config(cfg.values)
    walk_cfg = _walk_config(cfg.values, coin)
    n, m = walk_cfg.n_sites, coin.m

    classical = {
        t: shannon_entropy(exact_evolve(n, t))
        for t in sample_times(cfg["run.t_max"], cfg["run.sample_every"])
    }

    def sample(state: SectorState, store: SeriesStore) -> None:
        s_coin = von_neumann_entropy(coin_density(state))
        s_walk = von_neumann_entropy(walker_density(state, basis="momentum"))
        if abs(s_coin - s_walk) > ENTROPY_MATCH_TOL:
            raise NumericGuardError(
                f"reduced entropies disagree at t={state.t}: {s_coin!r} vs {s_walk!r}"
            )
        store.add("entropy_quantum", (state.t, s_coin))
        store.add("entropy_classical", (state.t, classical[state.t]))

    store, final = run_evolution(
        writer, walk_cfg, cfg["run.t_max"], cfg["run.sample_every"], sample, resume
    )
    writer.write_csv("entropy_quantum.csv", ("t", "value"), store.rows("entropy_quantum"))
    writer.write_csv("entropy_classical.csv", ("t", "value"), store.rows("entropy_classical"))
    from .observables import page_value

    extras = {
        "final_t": final.t,
        "page_value": page_value(min(m, n), max(m, n)),
    }
    if n % 2 == 0 and m == n:
        # On an even ring the walk never leaves one sublattice, halving
        # the effective walker dimension that enters the random-state
        # entropy estimate when the two dimensions match.
        extras["page_value_sublattice"] = page_value(m // 2, m)
    return seeds, extras


def _drive_spectra(cfg: ExperimentConfig, writer: OutputWriter, resume: bool):
    coin, seeds = build_coin_from_config(cfg.values)
    walk_cfg = _walk_config(cfg.values, coin)
    n, m = walk_cfg.n_sites, coin.m
    window = (cfg["spectra.window_start"], cfg["spectra.window_end"])
    coin_side = m <= n

    def sample(state: SectorState, store: SeriesStore) -> None:
        if not window[0] <= state.t <= window[1]:
            return
        rho = coin_density(state) if coin_side else walker_density(state, basis="momentum")
        for lam in density_spectrum(rho):
            store.add("spectra", (state.t, float(lam)))

    store, final = run_evolution(
        writer, walk_cfg, cfg["run.t_max"], cfg["run.sample_every"], sample, resume
    )
    rows = store.rows("spectra")
    pooled = np.sort(np.asarray([row[1] for row in rows], dtype=np.float64))
    writer.write_csv("spectra.csv", ("eigenvalue",), ((lam,) for lam in pooled))

    n1, n2 = min(m, n), max(m, n)
    lo, hi = mp_support(n1, n2)
    grid = np.linspace(lo, hi, 513)
    writer.write_csv(
        "mp_reference.csv",
        ("eigenvalue", "density"),
        zip(grid, mp_density(grid, n1, n2)),
    )
    dim = n1
    n_matrices = len(rows) // dim if dim else 0
    writer.write_json(
        "spectra_meta.json",
        {
            "window": list(window),
            "m": m,
            "n": n,
            "pooled_side": "coin" if coin_side else "walker",
            "n1": n1,
            "n2": n2,
            "n_matrices": n_matrices,
            "mp_support": [lo, hi],
        },
    )
    return seeds, {"final_t": final.t, "n_matrices": n_matrices}


def _drive_portrait(cfg: ExperimentConfig, writer: OutputWriter, resume: bool):
    params = HarperParams(g=cfg["portrait.g"], tau=cfg["portrait.tau"])
    seed = cfg["portrait.seed"]
    orbits = phase_portrait(
        params, n_orbits=cfg["portrait.orbits"], n_steps=cfg["portrait.steps"], seed=seed
    )
    rows = []
    for orbit_id, orbit in enumerate(orbits):
        for step, (q, p) in enumerate(orbit):
            rows.append((orbit_id, step, q, p))
    writer.write_csv("portrait.csv", ("orbit_id", "step", "q", "p"), rows)
    cloud = np.vstack(orbits)
    return [seed], {"coverage_50x50": coverage_fraction(cloud)}


def _td_job(m: int, seed: int) -> tuple[int, int, int]:
    """Departure time of one disordered-coin walk with n = m + 1 sites."""
    coin = sample_cue(m, seed)
    walk_cfg = WalkConfig(coin=coin, n_sites=m + 1)
    blocks = sector_blocks(walk_cfg)
    state = initial_state(walk_cfg)
    times, variances = [], []
    t_max = 2 * m
    for t in range(t_max + 1):
        if t > 0:
            state = evolve(state, blocks, 1)
        times.append(t)
        variances.append(variance(position_distribution(state)))
    td = diffusive_time(times, variances)
    return m, seed, -1 if td is None else td


def _drive_td_sweep(cfg: ExperimentConfig, writer: OutputWriter, resume: bool):
    m_values = cfg["td.m_values"]
    per_m = cfg["td.seeds_per_m"]
    master = cfg["td.master_seed"]
    seeds = ensemble_seeds(master, len(m_values) * per_m)
    jobs = [
        (m, seeds[i * per_m + j])
        for i, m in enumerate(m_values)
        for j in range(per_m)
    ]
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda job: _td_job(*job), jobs))
    writer.write_csv("td.csv", ("m", "seed", "t_d"), results)

    summary = []
    for m in m_values:
        detected = [td for mm, _, td in results if mm == m and td >= 0]
        summary.append((m, statistics.median(detected) if detected else -1))
    writer.write_csv("td_summary.csv", ("m", "t_d_median"), summary)
    return [master], {
        "m_values": list(m_values),
        "seeds_per_m": per_m,
        "lattice_rule": "n = m + 1",
        "horizon_rule": "t_max = 2 m",
    }


# ------------------------------------------------------------ figure presets

_PORTRAIT_TEXT = """\
experiment.kind = portrait
portrait.g = {g}
portrait.tau = 1.0
portrait.orbits = {orbits}
portrait.steps = {steps}
portrait.seed = {seed}
outputs.dir = .
"""

_WALK_TEXT = """\
experiment.kind = walk
coin.type = {coin}
coin.m = {m}
{coin_extra}lattice.n = {n}
run.t_max = {t_max}
run.sample_every = {sample_every}
run.snapshot_every = {snapshot_every}
outputs.dir = .
"""

_FIDELITY_TEXT = """\
experiment.kind = fidelity
coin.type = cue
coin.m = {m}
coin.seed = {seed}
lattice.n = {n}
run.t_max = {t_max}
run.sample_every = 1
fidelity.deltas = {deltas}
outputs.dir = .
"""

_SERIES_TEXT = """\
experiment.kind = {kind}
coin.type = {coin}
coin.m = {m}
{coin_extra}lattice.n = {n}
run.t_max = {t_max}
run.sample_every = {sample_every}
{kind_extra}outputs.dir = .
"""

_TD_TEXT = """\
experiment.kind = td_sweep
coin.type = cue
td.m_values = {m_values}
td.seeds_per_m = {per_m}
td.master_seed = {seed}
outputs.dir = .
"""


def _coin_extra(coin: str, seed: int, g: float | None = None) -> str:
    if coin == "cue":
        return f"coin.seed = {seed}\n"
    return f"coin.g = {g}\n"


def _walk_text(coin, m, n, t_max, seed, g=None, sample_every=1, snapshot_every=None):
    return _WALK_TEXT.format(
        coin=coin,
        m=m,
        coin_extra=_coin_extra(coin, seed, g),
        n=n,
        t_max=t_max,
        sample_every=sample_every,
        snapshot_every=snapshot_every if snapshot_every is not None else t_max or 1,
    )


def _series_text(kind, coin, m, n, t_max, seed, g=None, sample_every=10, kind_extra=""):
    return _SERIES_TEXT.format(
        kind=kind,
        coin=coin,
        m=m,
        coin_extra=_coin_extra(coin, seed, g),
        n=n,
        t_max=t_max,
        sample_every=sample_every,
        kind_extra=kind_extra,
    )


def figure_presets(name: str, seed: int = 7) -> list[tuple[str, str]]:
    """(subdirectory, config text) pairs reproducing one figure's data.

    Random-coin presets pin the given master seed so a preset run is a
    deterministic regression target rather than a one-off realization.
    """
    spectra_extra = "spectra.window_start = 700\nspectra.window_end = 1700\n"
    if name == "fig1":
        return [
            ("g001", _PORTRAIT_TEXT.format(g=0.01, orbits=100, steps=1000, seed=seed)),
            ("g005", _PORTRAIT_TEXT.format(g=0.05, orbits=100, steps=1000, seed=seed)),
            ("g040", _PORTRAIT_TEXT.format(g=0.4, orbits=1, steps=100000, seed=seed)),
        ]
    if name == "fig2a":
        return [
            ("g001", _walk_text("harper", 64, 101, 40, seed, g=0.01)),
            ("g040", _walk_text("harper", 64, 101, 40, seed, g=0.4)),
        ]
    if name == "fig2b":
        return [
            ("g001", _walk_text("harper", 64, 101, 100, seed, g=0.01)),
            ("g040", _walk_text("harper", 64, 101, 100, seed, g=0.4)),
        ]
    if name == "fig2c":
        return [("g040", _walk_text("harper", 40, 401, 2000, seed, g=0.4))]
    if name == "fig3a":
        return [
            (
                ".",
                _FIDELITY_TEXT.format(m=256, n=101, t_max=40, seed=seed, deltas="1,3,5,7,9"),
            )
        ]
    if name == "fig3b":
        return [("quantum", _walk_text("cue", 256, 101, 40, seed))]
    if name == "fig4":
        return [(".", _TD_TEXT.format(m_values="20,30,40,60,80", per_m=5, seed=seed))]
    if name in ("fig5a", "fig6a"):
        kind = "entropy" if name.startswith("fig5") else "spectra"
        extra = "" if kind == "entropy" else spectra_extra
        return [(".", _series_text(kind, "cue", 100, 21, 1700, seed, kind_extra=extra))]
    if name in ("fig5b", "fig6b"):
        kind = "entropy" if name.startswith("fig5") else "spectra"
        extra = "" if kind == "entropy" else spectra_extra
        return [(".", _series_text(kind, "cue", 70, 71, 1700, seed, kind_extra=extra))]
    if name in ("fig5c", "fig6c"):
        kind = "entropy" if name.startswith("fig5") else "spectra"
        extra = "" if kind == "entropy" else spectra_extra
        return [(".", _series_text(kind, "cue", 20, 101, 1700, seed, kind_extra=extra))]
    if name == "fig7a":
        return [
            ("n61", _series_text("entropy", "cue", 60, 61, 1700, seed)),
            ("n60", _series_text("entropy", "cue", 60, 60, 1700, seed)),
        ]
    if name == "fig7b":
        return [
            ("n61", _series_text("entropy", "harper", 60, 61, 1700, seed, g=0.001)),
            ("n60", _series_text("entropy", "harper", 60, 60, 1700, seed, g=0.001)),
        ]
    raise ConfigError(f"unknown figure preset {name!r}")


def _distribution_rows(dist: PositionDistribution):
    labels, probs = dist.centered()
    return [(dist.t, int(label), p) for label, p in zip(labels, probs)]


def _figure_references(name: str, writer: OutputWriter) -> None:
    """Analytic/classical reference series some figures are plotted against."""
    if name in ("fig2a", "fig3b"):
        writer.write_csv(
            "gaussian_t40.csv",
            ("t", "n_centered", "p"),
            _distribution_rows(normal_prediction(101, 40)),
        )
        writer.write_csv(
            "binomial_t40.csv",
            ("t", "n_centered", "p"),
            _distribution_rows(binomial_prediction(101, 40)),
        )
    if name == "fig3b":
        rows = _distribution_rows(exact_evolve(101, 0)) + _distribution_rows(
            exact_evolve(101, 40)
        )
        writer.child("classical").write_csv("p_nt.csv", ("t", "n_centered", "p"), rows)


def _drive_figure(cfg: ExperimentConfig, writer: OutputWriter, resume: bool):
    name = cfg["figure.name"]
    seed = cfg["figure.seed"]
    seeds: list[int] = []
    subruns = []
    for subdir, text in figure_presets(name, seed):
        sub_cfg = parse_config(text)
        sub_seeds, _ = _DRIVERS[sub_cfg.kind](sub_cfg, writer.child(subdir), resume)
        seeds.extend(sub_seeds)
        subruns.append({"dir": subdir, "kind": sub_cfg.kind})
    _figure_references(name, writer)
    return sorted(set(seeds)), {"figure": name, "subruns": subruns}


_DRIVERS = {
    "walk": _drive_walk,
    "fidelity": _drive_fidelity,
    "entropy": _drive_entropy,
    "spectra": _drive_spectra,
    "portrait": _drive_portrait,
    "td_sweep": _drive_td_sweep,
    "figure": _drive_figure,
}


# ------------------------------------------------------------------- run


def run(
    cfg: ExperimentConfig,
    out_dir=None,
    force: bool = False,
    resume: bool = False,
) -> RunManifest:
    """Execute a parsed config and return the written manifest.

    Refuses to write into a directory holding a finished run (one with a
    manifest) unless ``force`` or ``resume`` is given.  The manifest is
    written last: its presence marks a complete, hash-inventoried run.
    """
    root = Path(out_dir) if out_dir is not None else Path(cfg["outputs.dir"])
    manifest_path = root / MANIFEST_NAME
    if manifest_path.exists() and not (force or resume):
        raise ConfigError(
            f"output dir {root} already holds a run (use --force to overwrite"
            " or --resume to continue)"
        )
    writer = OutputWriter(root)
    started = time.perf_counter()
    seeds, extras = _DRIVERS[cfg.kind](cfg, writer, resume)
    manifest = RunManifest(
        kind=cfg.kind,
        config_text=cfg.text,
        seeds=list(seeds),
        wall_time_s=time.perf_counter() - started,
        outputs=writer.output_list(),
        extras=extras,
    )
    payload = json.dumps(manifest.to_payload(), indent=2, sort_keys=True) + "\n"
    manifest_path.write_text(payload, encoding="ascii")
    return manifest


# ---------------------------------------------------------------- compare


class ToleranceFailure(Exception):
    """A compare report came back with at least one failing series."""

    def __init__(self, report: dict):
        super().__init__("comparison exceeded tolerance")
        self.report = report


def _read_csv(path: Path) -> tuple[list[str], list[list[float]]]:
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines:
        raise ConfigError(f"{path} is empty")
    header = lines[0].split(",")
    rows = [[float(cell) for cell in line.split(",")] for line in lines[1:]]
    return header, rows


def _distributions_by_time(header, rows) -> dict[int, PositionDistribution]:
    by_t: dict[int, list[tuple[int, float]]] = {}
    for row in rows:
        by_t.setdefault(int(row[0]), []).append((int(row[1]), row[2]))
    out = {}
    for t, pairs in by_t.items():
        pairs.sort()
        n = len(pairs)
        probs = np.zeros(n)
        for label, p in pairs:
            probs[(label + n) % n] = p
        out[t] = PositionDistribution(t=t, probs=probs)
    return out


def _compare_file(name: str, path_a: Path, path_b: Path, metric: str) -> dict:
    entry: dict = {"file": name}
    entry["identical_bytes"] = path_a.read_bytes() == path_b.read_bytes()
    header_a, rows_a = _read_csv(path_a)
    header_b, rows_b = _read_csv(path_b)
    if header_a != header_b:
        raise ConfigError(f"{name}: headers differ: {header_a} vs {header_b}")

    if header_a == ["t", "n_centered", "p"]:
        dists_a = _distributions_by_time(header_a, rows_a)
        dists_b = _distributions_by_time(header_b, rows_b)
        shared = sorted(set(dists_a) & set(dists_b))
        if not shared:
            raise ConfigError(f"{name}: no common sample times")
        per_t = {}
        for t in shared:
            if dists_a[t].n_sites != dists_b[t].n_sites:
                raise ConfigError(
                    f"{name}: size mismatch at t={t}:"
                    f" {dists_a[t].n_sites} vs {dists_b[t].n_sites}"
                )
            per_t[t] = distribution_distance(dists_a[t], dists_b[t], metric)
        entry["kind"] = "distribution"
        entry["metric"] = metric
        entry["per_time"] = {str(t): d for t, d in per_t.items()}
        entry["distance"] = max(per_t.values())
    elif header_a == ["eigenvalue"]:
        a = np.sort(np.asarray([r[0] for r in rows_a]))
        b = np.sort(np.asarray([r[0] for r in rows_b]))
        # Two-sample KS over the pooled grid; TV is undefined for samples.
        grid = np.concatenate([a, b])
        cdf_a = np.searchsorted(a, grid, side="right") / len(a)
        cdf_b = np.searchsorted(b, grid, side="right") / len(b)
        entry["kind"] = "sample_pool"
        entry["metric"] = "ks"
        entry["distance"] = float(np.max(np.abs(cdf_a - cdf_b)))
    else:
        if len(rows_a) != len(rows_b):
            raise ConfigError(
                f"{name}: row count mismatch: {len(rows_a)} vs {len(rows_b)}"
            )
        diff = 0.0
        for ra, rb in zip(rows_a, rows_b):
            for ca, cb in zip(ra, rb):
                diff = max(diff, abs(ca - cb))
        entry["kind"] = "table"
        entry["metric"] = "max_abs_diff"
        entry["distance"] = diff
    return entry


def compare(dir_a, dir_b, metric: str = "tv", tolerance: float = 0.05) -> dict:
    """Compare the CSV series two run directories share, series by series.

    Site distributions are compared by the requested metric per shared
    sample time; eigenvalue pools by two-sample KS; any other table by
    maximum absolute cell difference.  The report is JSON-ready.
    """
    if metric not in ("tv", "ks"):
        raise ConfigError(f"metric must be tv or ks, got {metric!r}")
    dir_a, dir_b = Path(dir_a), Path(dir_b)
    names_a = {p.relative_to(dir_a).as_posix() for p in dir_a.rglob("*.csv")}
    names_b = {p.relative_to(dir_b).as_posix() for p in dir_b.rglob("*.csv")}
    shared = sorted(names_a & names_b)
    if not shared:
        raise ConfigError(f"{dir_a} and {dir_b} share no CSV series")
    series = []
    for name in shared:
        entry = _compare_file(name, dir_a / name, dir_b / name, metric)
        entry["pass"] = entry["distance"] <= tolerance
        series.append(entry)
    return {
        "format": "chaoswalk-compare-1",
        "metric": metric,
        "tolerance": tolerance,
        "dir_a": str(dir_a),
        "dir_b": str(dir_b),
        "series": series,
        "pass": all(entry["pass"] for entry in series),
    }
