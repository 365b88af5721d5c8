import pytest
from hypothesis import given, settings, strategies as st

from convprims.autotune import autotune, rank_by_time
from convprims.bench import ConvConfig
from convprims.selector import Algorithm, compatible_algorithms, format_table, parse_table, select, supports
from convprims.tensor import ConvParams

SMALL = [ConvConfig.from_tuple(*t) for t in
         [(1, 1, 8, 8, 8, 16), (3, 1, 8, 8, 8, 8), (3, 2, 9, 9, 4, 8), (7, 2, 12, 12, 3, 8), (5, 1, 6, 6, 4, 4)]]


def table_measure(times):
    """Fake clock: times[(label, alg)] -> ns, with a default for pairs not listed."""
    def measure(config, alg):
        return times.get((config.label, alg), 1_000_000 + 1000 * alg.order)
    return measure


def test_argmin_by_construction():
    config = ConvConfig.from_tuple(1, 1, 8, 8, 4, 4)
    times = {Algorithm.TILED: 5e6, Algorithm.MATMUL: 3e6}
    result = autotune([config], algorithms=times, measure=lambda c, a: times[a])
    assert result.table.rules[0][1] == (Algorithm.MATMUL, Algorithm.TILED)
    assert result.timings[result.table.rules[0][0].key] == times


def test_restricted_to_compatible():
    config = ConvConfig.from_tuple(7, 2, 12, 12, 3, 4)
    result = autotune([config], measure=table_measure({}))
    ranking = result.table.rules[0][1]
    assert set(ranking) == set(compatible_algorithms(config.params))
    assert set(ranking) == {Algorithm.DIRECT, Algorithm.NAIVE_VECTORIZED, Algorithm.IM2COL}
    only = autotune([config], algorithms=[Algorithm.DIRECT, Algorithm.IM2COL], measure=table_measure({}))
    assert sorted(only.table.rules[0][1], key=lambda a: a.order) == [Algorithm.DIRECT, Algorithm.IM2COL]


def test_identical_configs_share_ranking():
    config = SMALL[1]
    result = autotune([config, config], reps=1, seed=3)
    assert len(result.table.rules) == 1
    twin = ConvConfig("again", config.params)
    assert select(result.table, twin.params) == select(result.table, config.params)


def test_failures_become_warnings():
    def measure(config, alg):
        if alg is Algorithm.WINOGRAD:
            raise RuntimeError("boom")
        return 10 + alg.order

    result = autotune([SMALL[1]], measure=measure)
    assert Algorithm.WINOGRAD not in result.table.rules[0][1]
    assert len(result.warnings) == 1 and "winograd" in result.warnings[0]
    empty = autotune([SMALL[1]], measure=lambda c, a: 1 / 0)
    assert empty.table.rules == ()
    assert any("no algorithm" in w for w in empty.warnings)


def test_ties_follow_declaration_order():
    assert rank_by_time({Algorithm.WINOGRAD: 1, Algorithm.TILED: 1, Algorithm.DIRECT: 2}) == (
        Algorithm.TILED, Algorithm.WINOGRAD, Algorithm.DIRECT)


def test_default_ranking_by_wins():
    times = {(SMALL[0].label, Algorithm.MATMUL): 1, (SMALL[1].label, Algorithm.WINOGRAD): 1,
             (SMALL[2].label, Algorithm.IM2COL): 1, (SMALL[3].label, Algorithm.IM2COL): 1}
    result = autotune(SMALL[:4], measure=table_measure(times))
    assert result.win_counts() == {Algorithm.IM2COL: 2, Algorithm.MATMUL: 1, Algorithm.WINOGRAD: 1}
    # most wins first, then declaration order among equals (winless ones included)
    assert result.table.default == (Algorithm.IM2COL, Algorithm.MATMUL, Algorithm.WINOGRAD,
                                    Algorithm.DIRECT, Algorithm.NAIVE_VECTORIZED, Algorithm.TILED)


def test_reps_validated():
    with pytest.raises(ValueError):
        autotune(SMALL, reps=0)


def test_accepts_plain_params():
    result = autotune([ConvParams.square(1, 1, 4, 4, 2, 2)], measure=table_measure({}))
    assert len(result.table.rules) == 1


def test_real_measurement_round_trips():
    result = autotune(SMALL, reps=2, seed=0)
    back = parse_table(format_table(result.table))
    for config in SMALL:
        chosen = select(back, config.params)
        assert supports(chosen, config.params)
        assert chosen == result.table.rules[SMALL.index(config)][1][0]
        times = result.timings[back.rules[SMALL.index(config)][0].key]
        assert times[chosen] == min(times.values())


@settings(max_examples=40, deadline=None)
@given(data=st.data(), scale=st.floats(1e-3, 1e3))
def test_rankings_invariant_under_time_scaling(data, scale):
    times = {(c.label, a): data.draw(st.integers(1, 50)) for c in SMALL for a in compatible_algorithms(c.params)}
    base = autotune(SMALL, measure=table_measure(times))
    scaled = autotune(SMALL, measure=lambda c, a: times[(c.label, a)] * scale)
    assert scaled.table == base.table
