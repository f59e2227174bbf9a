from __future__ import annotations

import math

import pytest

from qramkit.factory import (
    MoveLayer,
    TrapId,
    all_traps,
    apply_layer,
    build_nbg,
    ghost_pickups,
    initial_occupancy,
    max_move_distance,
    plan_csv,
    plan_rearrangement,
    replay_bonds,
    station_count,
    station_vertex,
    stations,
    timing_report,
    trap_coord,
    validate_aod_layer,
    verify_bpd,
)


def test_trap_coordinates():
    assert trap_coord(TrapId(0, 0, 0, 1, 1)) == (1, 1)
    assert trap_coord(TrapId(1, 1, 1, 2, 2)) == (2 + 3 + 3, 2 + 3)
    assert trap_coord(TrapId(2, 1, 0, 1, 1)) == (1 + 3 + 9, 1)
    with pytest.raises(ValueError):
        TrapId(0, 0, 0, 1, 3)
    with pytest.raises(ValueError):
        TrapId(1, 2, 0, 1, 1)
    with pytest.raises(ValueError):
        TrapId(1, 1, 2, 1, 1)


@pytest.mark.parametrize("N", [4, 8, 16, 256])
def test_station_counts(N):
    n = N.bit_length() - 1
    assert len(list(stations(N))) == station_count(N) == 2 * N - n - 2
    coords = [trap_coord(t) for t in all_traps(N)]
    assert len(coords) == len(set(coords)) == 8 * station_count(N)


def test_small_layout_counts():
    occ = initial_occupancy(8)
    assert occ.atoms == 55 and occ.traps() == 88 and len(occ.bonds) == 22
    with pytest.raises(ValueError):
        initial_occupancy(2)


def test_move_counts():
    assert [len(l) for l in plan_rearrangement(4)] == [2, 1, 2]
    assert [len(l) for l in plan_rearrangement(8)] == [8, 4, 6]


@pytest.mark.parametrize("N", [4, 8, 16, 32, 64, 128, 256, 1024])
def test_layers_aod_valid_without_ghosts(N):
    occ = initial_occupancy(N)
    for layer in plan_rearrangement(N):
        assert validate_aod_layer(layer, occ.occupied())
        assert ghost_pickups(layer, occ.occupied()) == []
        occ = apply_layer(occ, layer)
    assert len(occ.occupied()) == occ.atoms


def test_validator_rejects_bad_layers():
    a = TrapId(1, 0, 0, 1, 1)
    b = TrapId(1, 1, 0, 1, 1)
    c = TrapId(1, 1, 1, 1, 1)
    # order reversal along X
    assert not validate_aod_layer(MoveLayer(((a, TrapId(1, 1, 0, 3, 1)), (b, TrapId(1, 0, 0, 3, 1)))))
    # one source column sent to two target columns
    assert not validate_aod_layer(MoveLayer(((b, TrapId(1, 1, 0, 2, 1)), (c, TrapId(1, 1, 1, 3, 1)))))
    # duplicate targets
    t = TrapId(0, 0, 0, 3, 1)
    assert not validate_aod_layer(MoveLayer(((b, t), (c, t))))
    # target already holds an atom that stays put
    occ = initial_occupancy(4).occupied()
    assert not validate_aod_layer(MoveLayer(((b, TrapId(0, 0, 0, 2, 2)),)), occ)
    # source is empty
    assert not validate_aod_layer(MoveLayer(((TrapId(1, 1, 0, 3, 1), TrapId(0, 0, 0, 3, 1)),)), occ)
    assert validate_aod_layer(MoveLayer(()))


def test_station_vertex_children():
    # parent S has children 2S and 2S + 1 at the next column
    for C in range(4):
        for S in range(1 << C):
            J, K, a = station_vertex(3, C, S)
            assert J == 4 and K == C and 0 <= a < 1 << C


@pytest.mark.parametrize("N", [4, 8, 16, 32, 64, 128, 256])
def test_bpd_equals_nbg(N):
    assert verify_bpd(N)


def test_nbg_shape():
    g = build_nbg(8)
    assert len(g.vertices) == station_count(8)
    assert {v[0] for v in g.vertices} == {1, 2, 3}
    assert g.tree_edges(3)


def test_replay_rejects_invalid_layer():
    bad = MoveLayer(((TrapId(1, 1, 0, 3, 1), TrapId(0, 0, 0, 3, 1)),))
    with pytest.raises(ValueError):
        replay_bonds(4, [bad])


def test_timing_at_8192():
    r = timing_report(8192)
    assert r.T_query == pytest.approx(0.013, abs=1e-15)
    assert r.T_m == pytest.approx(0.013)
    assert r.T_g == 0.0
    assert 50 <= r.rate <= 150
    assert 0.10 <= r.rearrangement_fraction <= 0.17
    assert r.T_r == pytest.approx(3 * math.sqrt(6) * 33e-6 * 8192**0.25)


def test_timing_variants():
    lin = timing_report(1024, scheme="linear")
    assert lin.T_r == pytest.approx(3 * math.sqrt(1.5 * 1024) * 33e-6)
    opt = timing_report(1024)
    assert opt.T_r < lin.T_r
    derived = timing_report(8192, T=None)
    assert derived.T == pytest.approx(200e-6 * math.sqrt(3 / 110))
    with pytest.raises(ValueError):
        timing_report(8192, scheme="fast")
    with pytest.raises(ValueError):
        timing_report(8192, tau=-1)
    assert '"T_query"' in opt.to_json()


def test_linear_move_distance_bound():
    for N in (16, 256, 1024):
        assert max_move_distance(N) <= 1.5 * N


def test_plan_csv():
    text = plan_csv(plan_rearrangement(4))
    lines = text.strip().splitlines()
    assert lines[0] == "layer,from_X,from_Y,to_X,to_Y"
    assert len(lines) == 1 + 2 + 1 + 2
