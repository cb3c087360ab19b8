"""Sector evolution against the dense product-space oracle."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest

from chaoswalk.coins import HarperParams, build_harper, custom_coin, sample_cue
from chaoswalk.linalg import MalformedHeaderError
from chaoswalk.walk import (
    FULL_SPACE_LIMIT,
    PATH_SUM_LIMIT,
    OracleSizeError,
    PathDepthError,
    SectorState,
    WalkConfig,
    coin_density,
    evolve,
    full_space_densities,
    full_space_distribution,
    full_space_evolve,
    full_space_unitary,
    initial_state,
    load_sector_state,
    path_sum_distribution,
    position_distribution,
    save_sector_state,
    sector_blocks,
    step_operators,
    walker_density,
)

DATA_DIR = Path(__file__).parent / "data"


def hadamard_coin():
    return custom_coin(np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0), source="hadamard")


def sector_restriction(psi: np.ndarray, m: int, n: int) -> np.ndarray:
    """Project a dense coin-major state onto each walker-momentum sector."""
    a = psi.reshape(m, n)
    phases = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return (phases @ a.T) / np.sqrt(n)  # row k = unnormalized chi[k]


# ------------------------------------------------------------ block build


def test_zero_momentum_block_is_the_coin():
    coin = sample_cue(4, 11)
    blocks = sector_blocks(WalkConfig(coin, 5))
    assert np.array_equal(blocks[0], coin.matrix)


def test_half_momentum_block_negates_the_coin():
    coin = sample_cue(4, 11)
    blocks = sector_blocks(WalkConfig(coin, 6))
    assert np.max(np.abs(blocks[3] + coin.matrix)) <= 1e-12


def test_block_matches_hand_built_product():
    coin = sample_cue(4, 11)
    blocks = sector_blocks(WalkConfig(coin, 5))
    phase = np.exp(2j * np.pi / 5)
    hand = np.diag([phase, phase, phase.conjugate(), phase.conjugate()]) @ coin.matrix
    assert np.max(np.abs(blocks[1] - hand)) <= 1e-14


def test_blocks_unitary():
    coin = build_harper(6, HarperParams(g=0.4))
    for block in sector_blocks(WalkConfig(coin, 7)):
        assert np.max(np.abs(block.conj().T @ block - np.eye(6))) <= 1e-12


# -------------------------------------------------------------- evolution


def test_zero_steps_copies_the_state():
    config = WalkConfig(sample_cue(4, 1), 5)
    state = initial_state(config)
    out = evolve(state, sector_blocks(config), 0)
    assert out is not state
    assert np.array_equal(out.vectors, state.vectors)
    assert out.t == 0


def test_zero_coupling_walk_is_deterministic_translation():
    coin = build_harper(4, HarperParams(g=0.0))
    config = WalkConfig(coin, 11, initial_coin=0, initial_site=2)
    state = evolve(initial_state(config), sector_blocks(config), 7)
    probs = position_distribution(state).probs
    assert probs[(2 + 7) % 11] == pytest.approx(1.0, abs=1e-12)


def test_norm_conserved_over_long_run():
    config = WalkConfig(sample_cue(8, 3), 21)
    state = evolve(initial_state(config), sector_blocks(config), 2000)
    norms = np.linalg.norm(state.vectors, axis=1)
    assert np.max(np.abs(norms - 1.0)) <= 1e-9


def test_sector_state_matches_projected_oracle():
    config = WalkConfig(sample_cue(4, 9), 5)
    state = evolve(initial_state(config), sector_blocks(config), 7)
    psi = full_space_evolve(config, 7)
    chi = sector_restriction(psi, 4, 5)
    for k in range(5):
        overlap = abs(np.vdot(chi[k] / np.linalg.norm(chi[k]), state.vectors[k]))
        assert overlap >= 1.0 - 1e-12


@pytest.mark.parametrize("m,n", [(2, 5), (4, 5), (4, 6), (8, 9)])
@pytest.mark.parametrize("kind", ["cue", "harper"])
def test_oracle_equivalence_grid(m, n, kind):
    if kind == "cue":
        coin = sample_cue(m, 40 + m)
    else:
        coin = build_harper(m, HarperParams(g=0.4))
    config = WalkConfig(coin, n, initial_coin=m // 2, initial_site=n // 3)
    blocks = sector_blocks(config)
    state = initial_state(config)
    for t in (1, 5, 16):
        state = evolve(state, blocks, t - state.t)
        psi = full_space_evolve(config, t)
        rho_c, rho_w = full_space_densities(psi, m, n, t)
        assert (
            np.max(np.abs(position_distribution(state).probs - full_space_distribution(psi, m, n).probs))
            <= 1e-12
        )
        assert np.max(np.abs(coin_density(state).matrix - rho_c.matrix)) <= 1e-12
        assert np.max(np.abs(walker_density(state, "position").matrix - rho_w.matrix)) <= 1e-12


def test_translation_covariance_is_exact():
    coin = sample_cue(4, 2)
    base = WalkConfig(coin, 9, initial_site=0)
    moved = WalkConfig(coin, 9, initial_site=4)
    p0 = position_distribution(evolve(initial_state(base), sector_blocks(base), 6)).probs
    p4 = position_distribution(evolve(initial_state(moved), sector_blocks(moved), 6)).probs
    assert np.array_equal(np.roll(p0, 4), p4)


# --------------------------------------------------------------- densities


def test_coin_density_starts_pure():
    config = WalkConfig(sample_cue(4, 5), 7, initial_coin=2)
    rho = coin_density(initial_state(config))
    want = np.zeros((4, 4), dtype=np.complex128)
    want[2, 2] = 1.0
    assert np.max(np.abs(rho.matrix - want)) <= 1e-14


def test_coin_density_unit_trace():
    config = WalkConfig(sample_cue(6, 5), 11)
    state = evolve(initial_state(config), sector_blocks(config), 37)
    assert abs(np.trace(coin_density(state).matrix) - 1.0) <= 1e-12


def test_walker_density_momentum_entries_at_start():
    config = WalkConfig(sample_cue(4, 5), 7)
    rho = walker_density(initial_state(config), "momentum")
    assert np.max(np.abs(rho.matrix - 1.0 / 7)) <= 1e-12


def test_position_density_diagonal_is_the_distribution():
    config = WalkConfig(sample_cue(4, 5), 9)
    state = evolve(initial_state(config), sector_blocks(config), 11)
    diag = np.diag(walker_density(state, "position").matrix).real
    assert np.max(np.abs(diag - position_distribution(state).probs)) <= 1e-12


def test_coin_and_walker_spectra_agree():
    config = WalkConfig(sample_cue(6, 5), 11)
    state = evolve(initial_state(config), sector_blocks(config), 25)
    from chaoswalk.observables import density_spectrum

    s_coin = density_spectrum(coin_density(state))
    s_walk = density_spectrum(walker_density(state, "momentum"))
    assert np.max(np.abs(np.sort(s_coin) - np.sort(s_walk)[-6:])) <= 1e-9


def test_walker_density_rejects_unknown_basis():
    config = WalkConfig(sample_cue(4, 5), 7)
    with pytest.raises(ValueError):
        walker_density(initial_state(config), "energy")


# ------------------------------------------------------------ distribution


def test_distribution_starts_as_delta():
    config = WalkConfig(sample_cue(4, 5), 7, initial_site=3)
    probs = position_distribution(initial_state(config)).probs
    want = np.zeros(7)
    want[3] = 1.0
    assert np.max(np.abs(probs - want)) <= 1e-12


@pytest.mark.parametrize("t", [1, 3, 7, 15])
def test_even_ring_keeps_sublattice_parity(t):
    config = WalkConfig(sample_cue(4, 8), 20)
    state = evolve(initial_state(config), sector_blocks(config), t)
    probs = position_distribution(state).probs
    off_parity = probs[np.arange(20) % 2 != t % 2]
    assert np.max(off_parity) <= 1e-12


def test_centered_labels_roll_the_origin():
    config = WalkConfig(sample_cue(4, 5), 7, initial_site=0)
    state = evolve(initial_state(config), sector_blocks(config), 2)
    dist = position_distribution(state)
    labels, probs = dist.centered()
    assert labels.tolist() == [-3, -2, -1, 0, 1, 2, 3]
    assert np.array_equal(probs, np.roll(dist.probs, 3))
    assert abs(probs.sum() - 1.0) <= 1e-12


# ---------------------------------------------------------------- path sum


def test_single_step_splits_between_neighbors():
    coin = sample_cue(4, 6)
    up, down = step_operators(coin)
    dist = path_sum_distribution(coin, 7, 1)
    want = np.zeros(7)
    want[1] = np.linalg.norm(up[:, 0]) ** 2
    want[6] = np.linalg.norm(down[:, 0]) ** 2
    assert np.max(np.abs(dist.probs - want)) <= 1e-12


def test_path_sum_matches_sector_evolution():
    coin = sample_cue(4, 6)
    config = WalkConfig(coin, 5, initial_coin=1)
    state = evolve(initial_state(config), sector_blocks(config), 4)
    dist = path_sum_distribution(coin, 5, 4, initial_coin=1)
    assert np.max(np.abs(dist.probs - position_distribution(state).probs)) <= 1e-10


def test_path_sum_parity_zeros_are_exact():
    dist = path_sum_distribution(sample_cue(2, 1), 6, 3)
    assert all(dist.probs[n] == 0.0 for n in range(6) if (n + 3) % 2 == 1)


def test_path_sum_depth_guard():
    coin = sample_cue(2, 1)
    path_sum_distribution(coin, 5, PATH_SUM_LIMIT)
    with pytest.raises(PathDepthError):
        path_sum_distribution(coin, 5, PATH_SUM_LIMIT + 1)


# ------------------------------------------------------------ dense oracle


def test_oracle_size_guard():
    coin = sample_cue(64, 0)
    full_space_unitary(WalkConfig(coin, FULL_SPACE_LIMIT // 64))
    with pytest.raises(OracleSizeError):
        full_space_unitary(WalkConfig(coin, FULL_SPACE_LIMIT // 64 + 1))


def test_oracle_zero_steps_is_product_start():
    config = WalkConfig(sample_cue(4, 5), 5, initial_coin=1, initial_site=2)
    psi = full_space_evolve(config, 0)
    want = np.zeros(20, dtype=np.complex128)
    want[1 * 5 + 2] = 1.0
    assert np.array_equal(psi, want)


def test_oracle_unitary_is_unitary():
    u = full_space_unitary(WalkConfig(sample_cue(4, 5), 6))
    assert np.max(np.abs(u.conj().T @ u - np.eye(24))) <= 1e-12


# -------------------------------------------------------------- golden run


def test_hadamard_walk_regression():
    """Two-peaked walk profile locked bitwise against a stored run."""
    config = WalkConfig(hadamard_coin(), 21)
    state = evolve(initial_state(config), sector_blocks(config), 10)
    labels, probs = position_distribution(state).centered()

    rows = list(csv.DictReader((DATA_DIR / "hadamard_n21_t10.csv").open()))
    assert len(rows) == 21
    for row, label, p in zip(rows, labels, probs):
        assert int(row["n_centered"]) == label
        assert float(row["p"]) == p  # 17-digit round trip, no tolerance

    # ballistic peaks sit away from the origin on both sides
    center = 10
    left = np.argmax(probs[:center])
    right = center + 1 + np.argmax(probs[center + 1 :])
    assert probs[left] > probs[center] and probs[right] > probs[center]
    assert abs(labels[left]) >= 5 and abs(labels[right]) >= 5


# ------------------------------------------------------------- checkpoints


def test_sector_state_round_trip(tmp_path):
    config = WalkConfig(sample_cue(4, 5), 7)
    state = evolve(initial_state(config), sector_blocks(config), 13)
    path = tmp_path / "state.sec"
    save_sector_state(state, path)
    back = load_sector_state(path)
    assert back.t == 13
    assert np.array_equal(
        back.vectors.view(np.float64), state.vectors.view(np.float64)
    )


def test_sector_state_malformed_header(tmp_path):
    path = tmp_path / "junk.sec"
    path.write_bytes(b"SEC2 7 4 13\nxxxx")
    with pytest.raises(MalformedHeaderError):
        load_sector_state(path)


def test_walk_config_wraps_initial_site():
    config = WalkConfig(sample_cue(4, 5), 7, initial_site=9)
    assert config.initial_site == 2
