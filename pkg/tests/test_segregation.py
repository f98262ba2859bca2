import copy
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from desegsim.lattice import AgentType, Coord, InfluenceTag, RegionType, World, stamp_influence
from desegsim.mapgen import classify_regions
from desegsim.segregation import (
    AgentState,
    HappinessRule,
    evaluate_happiness,
    happiness_vector,
    iid,
    iid_vector,
    is_happy,
    movement_phase,
    relocate,
    select_destination,
)

from conftest import world_from_picture

H = HappinessRule


def test_iid_three_of_five_alike():
    world, agents = world_from_picture(
        """
        EEE
        .EN
        N..
        """.replace(" ", "")
    )
    centre = next(a for a in agents if a.position == (1, 1))
    assert iid(world, centre) == pytest.approx(0.4)


def test_iid_two_of_five_alike():
    world, agents = world_from_picture("EEN\n.EN\nN..")
    centre = next(a for a in agents if a.position == (1, 1))
    assert iid(world, centre) == pytest.approx(0.6)


def test_iid_homogeneous_and_isolated():
    world, agents = world_from_picture("NNN\nNNN\nNNN")
    assert iid(world, agents[4]) == 0.0
    world, agents = world_from_picture("...\n.E.\n...")
    assert iid(world, agents[0]) == 0.0


def test_iid_all_opposite_is_one():
    world, agents = world_from_picture("NNN\nNEN\nNNN")
    assert iid(world, agents[4]) == 1.0


def test_happiness_examples():
    # centre expat with 2 of 5 occupied neighbours alike: iid = 0.6
    world, agents = world_from_picture("EEN\n.EN\nN..")
    centre = next(a for a in agents if a.position == (1, 1))
    stamp_influence(world, centre.position, 0, InfluenceTag.COOPERATION, 1)
    assert evaluate_happiness(world, centre, H.LITERAL_EQ2, 0.5) is AgentState.HAPPY
    assert evaluate_happiness(world, centre, H.BASE, 0.5) is AgentState.UNHAPPY


def test_reconciled_classic_rule_under_noncooperation():
    # iid = 2/7 < 0.4
    world, agents = world_from_picture("ENN\nEEE\nEE.")
    centre = next(a for a in agents if a.position == (1, 1))
    assert iid(world, centre) == pytest.approx(2 / 7)
    stamp_influence(world, centre.position, 0, InfluenceTag.NON_COOPERATION, 1)
    assert evaluate_happiness(world, centre, H.RECONCILED, 0.4) is AgentState.HAPPY


@pytest.mark.parametrize(
    "iid_value,tag,rule,pdtu,expected",
    [
        (0.6, InfluenceTag.COOPERATION, H.LITERAL_EQ2, 0.5, True),
        (0.6, InfluenceTag.NULL, H.BASE, 0.5, False),
        (0.3, InfluenceTag.NON_COOPERATION, H.RECONCILED, 0.4, True),
        (0.3, InfluenceTag.NULL, H.RECONCILED, 0.4, True),
        (0.3, InfluenceTag.COOPERATION, H.RECONCILED, 0.4, False),
        (0.5, InfluenceTag.COOPERATION, H.RECONCILED, 0.4, True),
        (0.5, InfluenceTag.NULL, H.RECONCILED, 0.4, False),
        (0.4, InfluenceTag.NULL, H.BASE, 0.4, True),
        (0.4, InfluenceTag.NULL, H.LITERAL_EQ2, 0.4, True),
        (0.3, InfluenceTag.NULL, H.LITERAL_EQ2, 0.4, False),
    ],
)
def test_rule_table(iid_value, tag, rule, pdtu, expected):
    assert bool(is_happy(iid_value, tag, rule, pdtu)) is expected


@given(st.floats(0, 1), st.floats(0, 1))
def test_literal_noncooperation_always_unhappy(iid_value, pdtu):
    assert not is_happy(iid_value, InfluenceTag.NON_COOPERATION, H.LITERAL_EQ2, pdtu)


@given(st.floats(0, 1))
def test_base_pdtu_one_always_happy(iid_value):
    assert is_happy(iid_value, InfluenceTag.NULL, H.BASE, 1.0)


pictures = st.lists(
    st.text(alphabet="EN.", min_size=6, max_size=6), min_size=1, max_size=6
).map(lambda rows: "\n".join(rows))


@settings(max_examples=60)
@given(pictures)
def test_vector_matches_scalar_and_invariants(picture):
    world, agents = world_from_picture(picture)
    vec = iid_vector(world, agents)
    assert np.allclose(vec, [iid(world, a) for a in agents])
    assert ((vec >= 0) & (vec <= 1)).all()
    # pdtu = 0: unhappy iff any opposite-type neighbour
    flags = happiness_vector(world, agents, H.BASE, 0.0)
    assert list(flags) == [iid(world, a) == 0 for a in agents]


@settings(max_examples=40)
@given(pictures)
def test_type_relabeling_preserves_iid(picture):
    world, agents = world_from_picture(picture)
    swapped = picture.translate(str.maketrans("EN", "NE"))
    world2, agents2 = world_from_picture(swapped)
    assert np.array_equal(iid_vector(world, agents), iid_vector(world2, agents2))


def stuck_pair_world():
    """Two unhappy expats in a full native region; one free neutral cell at (5, 0)."""
    regions = np.zeros((3, 6), dtype=int)
    regions[0, 5] = 1
    world, agents = world_from_picture("NNNNN.\nENNNEN\nNNNNNN", regions=regions)
    classify_regions(world, 0.4)
    return world, agents


def test_stuck_pair_setup():
    world, agents = stuck_pair_world()
    assert [r.region_type for r in world.regions] == [RegionType.NATIVE, RegionType.NEUTRAL]
    flags = happiness_vector(world, agents, H.BASE, 0.4)
    unhappy = [a for a, f in zip(agents, flags) if not f]
    assert sorted(a.position for a in unhappy) == [(0, 1), (4, 1)]
    assert all(a.agent_type is AgentType.EXPAT for a in unhappy)


def test_select_destination_none_available():
    world, agents = stuck_pair_world()
    world.place(99, AgentType.NATIVE, Coord(5, 0))
    expat = next(a for a in agents if a.position == (0, 1))
    assert select_destination(world, expat, np.random.default_rng(0)) is None


def test_select_destination_single_option_and_determinism():
    world, agents = stuck_pair_world()
    expat = next(a for a in agents if a.position == (0, 1))
    assert select_destination(world, expat, np.random.default_rng(3)) == (5, 0)
    world2, agents2 = world_from_picture("E....\n.....\nN....", regions=[[0, 0, 1, 1, 1]] * 3)
    classify_regions(world2, 0.4)
    picks = [select_destination(world2, agents2[0], np.random.default_rng(42)) for _ in range(3)]
    assert picks[0] == picks[1] == picks[2]


def test_select_destination_uniform_over_regions_then_cells():
    # region 0 has 1 free cell, region 1 has 3: region-first choice gives 1/2 to the lone cell
    regions = [[0, 0, 1, 1, 1]]
    world, agents = world_from_picture("E....", regions=regions)
    classify_regions(world, 0.4)
    world.regions[0].region_type = RegionType.NEUTRAL
    rng = np.random.default_rng(0)
    hits = Counter(select_destination(world, agents[0], rng) for _ in range(4000))
    assert abs(hits[(1, 0)] / 4000 - 0.5) < 0.03
    assert set(hits) == {(1, 0), (2, 0), (3, 0), (4, 0)}


def test_movement_all_happy_is_noop():
    world, agents = world_from_picture("EE..\nEE..\n..NN\n..NN")
    classify_regions(world, 0.4)
    before = world.occupant.copy()
    assert movement_phase(world, agents, H.BASE, 0.4, np.random.default_rng(0)) == 0
    assert np.array_equal(before, world.occupant)


def test_movement_one_mover_one_destination():
    world, agents = world_from_picture("EN..", regions=[[0, 0, 1, 1]])
    world.regions[0].region_type = RegionType.EXPAT
    world.regions[1].region_type = RegionType.NATIVE
    expat = agents[0]
    # iid 1 > 0.4, but its own region is full and region 1 is native-only
    assert movement_phase(world, [expat], H.BASE, 0.4, np.random.default_rng(0)) == 0
    world.regions[1].region_type = RegionType.NEUTRAL
    assert movement_phase(world, [expat], H.BASE, 0.4, np.random.default_rng(0)) == 1
    assert world.is_free(Coord(0, 0))
    assert world.region_of(expat.position) == 1


def _replay(world, agents, order):
    world, agents = copy.deepcopy(world), copy.deepcopy(agents)
    moved = []
    for i in order:
        dest = select_destination(world, agents[i], np.random.default_rng(0))
        if dest is not None:
            relocate(world, agents[i], dest)
            moved.append(i)
    return moved


def test_two_movers_last_free_cell_exclusive():
    world, agents = stuck_pair_world()
    movers = [i for i, a in enumerate(agents) if a.agent_type is AgentType.EXPAT]
    # every order lets exactly its first mover through
    for order in (movers, movers[::-1]):
        assert _replay(world, agents, order) == [order[0]]
    winners = set()
    for seed in range(20):
        w, ags = copy.deepcopy(world), copy.deepcopy(agents)
        assert movement_phase(w, ags, H.BASE, 0.4, np.random.default_rng(seed)) == 1
        (winner,) = [i for i in movers if ags[i].position == (5, 0)]
        winners.add(winner)
    assert winners == set(movers)


@settings(max_examples=30, deadline=None)
@given(pictures, st.sampled_from(list(H)), st.floats(0, 1), st.integers(0, 2**16))
def test_movement_conserves_population(picture, rule, pdtu, seed):
    world, agents = world_from_picture(picture)
    classify_regions(world, 0.4)
    before = Counter(a.agent_type for a in agents)
    movement_phase(world, agents, rule, pdtu, np.random.default_rng(seed))
    assert Counter(a.agent_type for a in agents) == before
    assert len({a.position for a in agents}) == len(agents)
    for a in agents:
        assert world.occupant[a.position[1], a.position[0]] == a.id
        assert world.kind[a.position[1], a.position[0]] == a.agent_type
    assert np.count_nonzero(world.occupant >= 0) == len(agents)
