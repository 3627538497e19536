import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nncov
from nncov import (
    ActivationTrace,
    ArgumentError,
    BindingError,
    CoverageConfig,
    DataError,
    MergeError,
    TraceError,
)
from nncov.coverage import encode_pattern
from conftest import profile_from_random_training, random_model, random_suite, traces_for
from oracles import brute_force_counts


def tiny_model(widths, input_size=2):
    sizes = [input_size] + list(widths)
    return nncov.build_mlp(sizes, seed=123)


def flat_profile(model, low, high):
    return nncov.NeuronProfile(
        model.model_id,
        [np.full(w, low, dtype=np.float32) for w in model.layer_sizes],
        [np.full(w, high, dtype=np.float32) for w in model.layer_sizes],
    )


def trace(*layer_values):
    return ActivationTrace("t", [np.asarray(v, dtype=np.float32) for v in layer_values])


def test_new_state_reports_all_zero():
    model = tiny_model([4])
    state = nncov.new_state(model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5))
    report = state.report()
    assert report.kmnc == report.nbc == report.snac == report.tknc == report.nc == 0.0
    assert report.tknp == 0
    assert report.inputs_seen == 0


def test_new_state_twice_equal():
    model = tiny_model([4])
    prof = flat_profile(model, 0.0, 10.0)
    cfg = CoverageConfig(k_sections=5)
    assert nncov.new_state(model, prof, cfg) == nncov.new_state(model, prof, cfg)


def test_merge_identity():
    model = tiny_model([4])
    prof = flat_profile(model, 0.0, 10.0)
    cfg = CoverageConfig(k_sections=5)
    state = nncov.new_state(model, prof, cfg)
    state.update(trace([1.0, 3.0, 5.0, 7.0]))
    empty = nncov.new_state(model, prof, cfg)
    assert nncov.merge(empty, state) == state
    assert nncov.merge(state, empty) == state


def test_inside_bounds_keeps_corners_empty():
    model = tiny_model([4])
    state = nncov.new_state(model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5))
    state.update(trace([0.0, 10.0, 5.0, 9.999]))  # values at the closed bounds included
    report = state.report()
    assert report.nbc == 0.0
    assert report.snac == 0.0
    assert report.kmnc > 0


def test_single_input_kmnc_is_one_section_per_neuron():
    model = tiny_model([4])
    state = nncov.new_state(model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5))
    state.update(trace([1.0, 3.0, 5.0, 7.0]))
    report = state.report()
    assert report.sections_covered == 4
    assert report.kmnc == 4 / (5 * 4) == 0.2


def test_upper_corner_ratios():
    model = tiny_model([4])
    state = nncov.new_state(model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5))
    state.update(trace([11.0, 3.0, 5.0, 7.0]))  # one neuron of four exceeds high
    report = state.report()
    assert report.nbc == 1 / 8
    assert report.snac == 1 / 4


def test_tknc_two_layers():
    model = tiny_model([3, 3], input_size=3)
    state = nncov.new_state(model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5, top_k=1))
    state.update(trace([1.0, 2.0, 3.0], [6.0, 5.0, 4.0]))
    report = state.report()
    assert report.topk_neurons == 2
    assert report.tknc == 2 / 6


def test_tknp_dedup_semantics():
    model = tiny_model([3, 3], input_size=3)
    state = nncov.new_state(model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5, top_k=1))
    state.update(trace([1.0, 2.0, 3.0], [6.0, 5.0, 4.0]))
    state.update(trace([1.0, 2.0, 3.0], [6.0, 5.0, 4.0]))
    assert state.report().tknp == 1
    state.update(trace([9.0, 2.0, 3.0], [6.0, 5.0, 4.0]))  # different layer-0 winner
    assert state.report().tknp == 2


def test_topk_tie_breaks_to_lower_index():
    model = tiny_model([3])
    state = nncov.new_state(model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5, top_k=2))
    state.update(trace([5.0, 5.0, 5.0]))
    assert np.array_equal(state.topk[0], [True, True, False])


def test_nc_layer_scaling_and_threshold():
    model = tiny_model([4])
    state = nncov.new_state(
        model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5, nc_threshold=0.5)
    )
    state.update(trace([0.0, 2.0, 6.0, 8.0]))  # scaled: 0, .25, .75, 1
    assert np.array_equal(state.nc[0], [False, False, True, True])
    # constant layer scales to zero everywhere: no hits
    state2 = nncov.new_state(
        model, flat_profile(model, 0.0, 10.0), CoverageConfig(k_sections=5, nc_threshold=0.5)
    )
    state2.update(trace([3.0, 3.0, 3.0, 3.0]))
    assert not state2.nc[0].any()


def test_update_errors():
    model = tiny_model([4])
    prof = flat_profile(model, 0.0, 10.0)
    state = nncov.new_state(model, prof, CoverageConfig(k_sections=5))
    with pytest.raises(TraceError):
        state.update(trace([1.0, 2.0, 3.0]))  # wrong width
    with pytest.raises(TraceError):
        state.update(trace([1.0, 2.0, 3.0, 4.0], [1.0]))  # wrong layer count
    with pytest.raises(DataError, match="layer 0, neuron 2"):
        state.update(trace([1.0, 2.0, np.nan, 4.0]))
    # failed updates must not half-apply
    assert state == nncov.new_state(model, prof, CoverageConfig(k_sections=5))


def test_binding_checks():
    model = tiny_model([4])
    other = tiny_model([4, 4])
    prof = flat_profile(model, 0.0, 10.0)
    with pytest.raises(BindingError):
        nncov.new_state(other, prof, CoverageConfig())
    with pytest.raises(BindingError):
        nncov.new_state(model, prof, CoverageConfig(top_k=5))  # wider than any layer
    a = nncov.new_state(model, prof, CoverageConfig(k_sections=5))
    b = nncov.new_state(model, prof, CoverageConfig(k_sections=6))
    with pytest.raises(MergeError):
        nncov.merge(a, b)


def test_config_validation():
    with pytest.raises(ArgumentError):
        CoverageConfig(k_sections=0)
    with pytest.raises(ArgumentError):
        CoverageConfig(top_k=0)
    with pytest.raises(ArgumentError):
        CoverageConfig(nc_threshold=1.5)


def test_pattern_encoding_order_independent():
    assert encode_pattern([np.array([2, 0])]) == encode_pattern([np.array([0, 2])])
    assert encode_pattern([np.array([0]), np.array([1])]) != encode_pattern(
        [np.array([1]), np.array([0])]
    )


def test_engine_matches_brute_force_oracle():
    rng = np.random.default_rng(100)
    for _ in range(6):
        model = random_model(rng)
        prof, _ = profile_from_random_training(rng, model)
        config = CoverageConfig(
            k_sections=int(rng.integers(1, 40)),
            top_k=int(rng.integers(1, min(model.layer_sizes) + 1)),
            nc_threshold=float(rng.uniform(0, 1)),
        )
        suite = traces_for(model, random_suite(rng, model, 200))
        state = nncov.new_state(model, prof, config)
        for t in suite:
            state.update(t)
        report = state.report()
        expected = brute_force_counts(
            model.layer_sizes, prof.lows, prof.highs, [t.layers for t in suite], config
        )
        assert report.sections_covered == expected["sections_covered"]
        assert report.upper_corner_neurons == expected["upper_corner_neurons"]
        assert report.lower_corner_neurons == expected["lower_corner_neurons"]
        assert report.topk_neurons == expected["topk_neurons"]
        assert report.nc_neurons == expected["nc_neurons"]
        assert report.tknp == expected["tknp"]
        assert report.kmnc == expected["kmnc"]
        assert report.nbc == expected["nbc"]
        assert report.snac == expected["snac"]
        assert report.tknc == expected["tknc"]
        assert report.nc == expected["nc"]


def test_update_monotone_and_permutation_invariant():
    rng = np.random.default_rng(77)
    model = random_model(rng)
    prof, _ = profile_from_random_training(rng, model)
    config = CoverageConfig(k_sections=10)
    suite = traces_for(model, random_suite(rng, model, 40))

    state = nncov.new_state(model, prof, config)
    previous = state.report()
    for t in suite:
        state.update(t)
        current = state.report()
        for criterion in ("kmnc", "nbc", "snac", "tknc", "nc", "tknp"):
            assert getattr(current, criterion) >= getattr(previous, criterion)
        previous = current
    assert 0 <= previous.kmnc <= 1 and 0 <= previous.nbc <= 1
    assert previous.tknp <= previous.inputs_seen

    shuffled = list(suite)
    rng.shuffle(shuffled)
    state2 = nncov.new_state(model, prof, config)
    for t in shuffled:
        state2.update(t)
    assert state2.report() == state.report()


def test_merge_commutative_and_homomorphic():
    rng = np.random.default_rng(55)
    model = random_model(rng)
    prof, _ = profile_from_random_training(rng, model)
    config = CoverageConfig(k_sections=8, top_k=1)
    suite_a = traces_for(model, random_suite(rng, model, 30))
    suite_b = traces_for(model, random_suite(rng, model, 25))

    sa = nncov.new_state(model, prof, config)
    for t in suite_a:
        sa.update(t)
    sb = nncov.new_state(model, prof, config)
    for t in suite_b:
        sb.update(t)
    assert nncov.merge(sa, sb) == nncov.merge(sb, sa)

    union = nncov.new_state(model, prof, config)
    for t in suite_a + suite_b:
        union.update(t)
    assert nncov.merge(sa, sb) == union


def test_zero_on_training(blob_setup):
    model, data, prof = blob_setup
    state = nncov.new_state(model, prof, CoverageConfig(k_sections=100))
    for t in traces_for(model, data.inputs):
        state.update(t)
    report = state.report()
    assert report.nbc == 0.0
    assert report.snac == 0.0
    assert report.kmnc > 0.0
    for value in (report.kmnc, report.nbc, report.snac, report.tknc, report.nc):
        assert 0.0 <= value <= 1.0


def test_diff_zero_and_monotone():
    rng = np.random.default_rng(31)
    model = random_model(rng)
    prof, _ = profile_from_random_training(rng, model)
    config = CoverageConfig(k_sections=12)
    suite = traces_for(model, random_suite(rng, model, 50))

    base_state = nncov.new_state(model, prof, config)
    for t in suite[:30]:
        base_state.update(t)
    base = base_state.report()
    assert nncov.diff(base, base).to_dict() == {
        "kmnc": 0.0, "nbc": 0.0, "snac": 0.0, "tknc": 0.0, "nc": 0.0,
        "tknp": 0, "inputs_seen": 0,
    }

    extended_state = nncov.new_state(model, prof, config)
    for t in suite:  # superset of the base suite
        extended_state.update(t)
    delta = nncov.diff(base, extended_state.report())
    assert delta.kmnc >= 0 and delta.nbc >= 0 and delta.snac >= 0
    assert delta.tknc >= 0 and delta.nc >= 0 and delta.tknp >= 0


def test_diff_binding_mismatch():
    model = tiny_model([4])
    prof = flat_profile(model, 0.0, 10.0)
    r1 = nncov.new_state(model, prof, CoverageConfig(k_sections=5)).report()
    r2 = nncov.new_state(model, prof, CoverageConfig(k_sections=6)).report()
    with pytest.raises(BindingError):
        nncov.diff(r1, r2)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_merge_property_random_states(seed):
    rng = np.random.default_rng(seed)
    model = tiny_model([4, 3], input_size=2)
    prof, _ = profile_from_random_training(rng, model, count=10)
    config = CoverageConfig(k_sections=6)
    a = nncov.new_state(model, prof, config)
    b = nncov.new_state(model, prof, config)
    for t in traces_for(model, random_suite(rng, model, 8)):
        a.update(t)
    for t in traces_for(model, random_suite(rng, model, 5)):
        b.update(t)
    empty = nncov.new_state(model, prof, config)
    assert nncov.merge(a, empty) == a
    assert nncov.merge(a, b) == nncov.merge(b, a)
