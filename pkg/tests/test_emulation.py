"""Codec and emulator tests, with exhaustive/vertex-enumeration oracles."""

import itertools
import math

import numpy as np
import pytest

from lincoder import (
    AffineField,
    ConstantField,
    InfeasibleTargetError,
    LinearSystemModel,
    OneHotSchedule,
    PiecewiseSchedule,
    SimplexCode,
    SourceFamily,
    TrajectoryDataset,
    compress_dataset,
    emulate,
    emulate_steps,
    endpoint_map,
    integer_code_count,
    integer_quantize,
    onehot_code_rate_bits,
    onehot_compress,
    planar_grid_family,
    sample_paths,
    simplex_compress,
    simplex_decompress,
)


def family_from(*vectors):
    return SourceFamily.from_vectors([np.asarray(v, dtype=float) for v in vectors])


def vertex_enumeration_min_flow(vectors, target, tol=1e-9):
    """Oracle: scan every basic solution of V dt = target, dt >= 0."""
    n, k = vectors.shape
    best = None
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(k), size):
            sub = vectors[:, subset]
            sol, residual, rank, _ = np.linalg.lstsq(sub, target, rcond=None)
            if rank < size:
                continue
            if np.max(np.abs(sub @ sol - target)) > tol:
                continue
            if np.any(sol < -1e-12):
                continue
            value = float(np.clip(sol, 0.0, None).sum())
            if best is None or value < best:
                best = value
    return best


class TestEndpointMap:
    def test_all_zero_activation_holds_still(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0])
        schedule = PiecewiseSchedule((0.0,), ((0, 0),), 1.0)
        assert np.array_equal(endpoint_map(fam, [3.0, 4.0], schedule), [3.0, 4.0])

    def test_one_hot_unit_fields(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0])
        out = endpoint_map(fam, [0.0, 0.0], OneHotSchedule((0, 1), 1.0))
        assert np.allclose(out, [0.5, 0.5], atol=1e-15)

    def test_constant_fields_match_occupancy_formula(self):
        rng = np.random.default_rng(3)
        fam = family_from(*rng.normal(size=(4, 3)))
        x = rng.normal(size=3)
        indices = (2, 0, 0, 3, 1, 2)
        horizon = 1.8
        out = endpoint_map(fam, x, OneHotSchedule(indices, horizon))
        # constants factor out of the integral: dx = sum_i V_i * occupancy_i
        occupancy = np.bincount(indices, minlength=4) * (horizon / len(indices))
        expected = x + fam.field_matrix() @ occupancy
        assert np.max(np.abs(out - expected)) <= 1e-12

    def test_overlapping_activations_sum_fields(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0])
        schedule = PiecewiseSchedule((0.0, 0.5), ((1, 1), (0, 1)), 1.0)
        out = endpoint_map(fam, [0.0, 0.0], schedule)
        assert np.allclose(out, [0.5, 1.0], atol=1e-15)

    def test_affine_field_against_closed_form(self):
        # single field x -> -x: flow over dt scales the state by exp(-dt)
        fam = SourceFamily((AffineField(-np.eye(2), np.zeros(2)),))
        out = endpoint_map(fam, [1.0, -2.0], OneHotSchedule((0,), 0.8))
        assert np.max(np.abs(out - math.exp(-0.8) * np.array([1.0, -2.0]))) <= 1e-8

    def test_onehot_equals_sequential_flows(self):
        rng = np.random.default_rng(5)
        fam = family_from(*rng.normal(size=(3, 2)))
        x = rng.normal(size=2)
        indices = (1, 2, 0)
        horizon = 0.9
        out = endpoint_map(fam, x, OneHotSchedule(indices, horizon))
        seg = horizon / 3
        manual = x.copy()
        for idx in indices:
            manual = manual + fam.fields[idx].vector * seg
        assert np.max(np.abs(out - manual)) <= 1e-12

    def test_index_out_of_range(self):
        fam = family_from([1.0])
        with pytest.raises(ValueError):
            endpoint_map(fam, [0.0], OneHotSchedule((1,), 1.0))


class TestOneHotCompress:
    def test_single_field_target_is_exact(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0])
        dt, segments = 1.0, 4
        target = dt * np.array([0.0, 1.0])  # exactly field 1 all the way
        indices = onehot_compress(fam, [0.0, 0.0], target, segments, dt)
        assert list(indices) == [1, 1, 1, 1]
        out = endpoint_map(fam, [0.0, 0.0], OneHotSchedule(tuple(indices), dt))
        assert np.max(np.abs(out - target)) <= 1e-12

    def test_antipodal_fields_cancel(self):
        v = np.array([0.7, -0.2])
        fam = family_from(v, -v)
        dt, segments = 1.0, 6
        indices = onehot_compress(fam, [0.0, 0.0], np.zeros(2), segments, dt)
        out = endpoint_map(fam, [0.0, 0.0], OneHotSchedule(tuple(indices), dt))
        greedy_error = float(np.linalg.norm(out))
        # exhaustive oracle over all K^N sequences
        best = math.inf
        h = dt / segments
        for seq in itertools.product(range(2), repeat=segments):
            occupancy = np.bincount(seq, minlength=2) * h
            best = min(best, float(np.linalg.norm(fam.field_matrix() @ occupancy)))
        assert greedy_error <= best + 2.0 * float(np.linalg.norm(v)) * dt / segments
        assert greedy_error <= 1e-12  # even split reaches zero exactly

    def test_greedy_close_to_exhaustive(self):
        rng = np.random.default_rng(11)
        fam = family_from(*rng.normal(size=(3, 2)))
        dt, segments = 1.0, 6
        h = dt / segments
        vectors = fam.field_matrix()
        for _ in range(5):
            weights = rng.uniform(0.0, 1.0, size=3)
            target = vectors @ weights * (dt / weights.sum())
            indices = onehot_compress(fam, np.zeros(2), target, segments, dt)
            reached = vectors @ (np.bincount(indices, minlength=3) * h)
            greedy_error = float(np.linalg.norm(reached - target))
            best = min(
                float(np.linalg.norm(vectors @ (np.bincount(seq, minlength=3) * h) - target))
                for seq in itertools.product(range(3), repeat=segments)
            )
            worst_field = max(np.linalg.norm(v) for v in vectors.T)
            assert greedy_error <= best + 2.0 * worst_field * h

    def test_deterministic_with_lowest_index_ties(self):
        fam = family_from([1.0, 0.0], [1.0, 0.0])  # duplicate fields tie everywhere
        indices = onehot_compress(fam, [0.0, 0.0], [1.0, 0.0], 5, 1.0)
        assert list(indices) == [0, 0, 0, 0, 0]

    def test_block_code_rate(self):
        assert onehot_code_rate_bits(24, 3, 6) == pytest.approx(0.5 * math.log2(24))
        assert onehot_code_rate_bits(2, 8, 1) == pytest.approx(8.0)


class TestSimplexCodec:
    def test_hand_lp(self):
        fam = family_from([1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0])
        code = simplex_compress(fam, [1.0, 0.5])
        assert code.flow_time == pytest.approx(1.5, abs=1e-12)
        assert np.allclose(code.probabilities, [2 / 3, 0.0, 1 / 3, 0.0], atol=1e-12)

    def test_zero_target_convention(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0])
        code = simplex_compress(fam, [0.0, 0.0])
        assert code.flow_time == 0.0
        assert np.allclose(code.probabilities, [0.5, 0.5])

    def test_infeasible_target(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0])  # cone = first quadrant
        with pytest.raises(InfeasibleTargetError):
            simplex_compress(fam, [-1.0, 0.0])

    def test_round_trip_on_random_cone_targets(self):
        rng = np.random.default_rng(21)
        vectors = rng.normal(size=(2, 24))
        fam = family_from(*vectors.T)
        x = np.zeros(2)
        for _ in range(50):
            target = vectors @ rng.uniform(0.0, 1.0, size=24)
            code = simplex_compress(fam, target)
            rebuilt = simplex_decompress(fam, x, code)
            assert np.max(np.abs(rebuilt - target)) <= 1e-9

    def test_minimality_against_vertex_enumeration(self):
        rng = np.random.default_rng(23)
        for k in (2, 4, 6, 8):
            for n in (1, 2, 3):
                vectors = rng.normal(size=(n, k))
                fam = family_from(*vectors.T)
                target = vectors @ rng.uniform(0.0, 1.0, size=k)
                code = simplex_compress(fam, target)
                oracle = vertex_enumeration_min_flow(vectors, target)
                assert oracle is not None
                assert code.flow_time == pytest.approx(oracle, abs=1e-9)

    def test_decompress_trivial_cases(self):
        fam = family_from([1.0, 0.0], [0.0, 2.0])
        zero = SimplexCode(np.array([0.5, 0.5]), 0.0)
        assert np.array_equal(simplex_decompress(fam, [9.9, -1.0], zero), [0.0, 0.0])
        onehot = SimplexCode(np.array([0.0, 1.0]), 0.3)
        assert np.allclose(simplex_decompress(fam, [0.0, 0.0], onehot), [0.0, 0.6])

    def test_decompress_evaluates_fields_at_state(self):
        fam = SourceFamily((AffineField(np.eye(2), np.zeros(2)),))
        code = SimplexCode(np.array([1.0]), 2.0)
        assert np.allclose(simplex_decompress(fam, [1.0, -3.0], code), [2.0, -6.0])


class TestIntegerQuantize:
    def test_one_hot(self):
        code = SimplexCode(np.array([0.0, 1.0, 0.0]), 1.0)
        assert list(integer_quantize(code, 7).counts) == [0, 7, 0]

    def test_exact_thirds(self):
        code = SimplexCode(np.array([1 / 3, 1 / 3, 1 / 3]), 1.0)
        assert list(integer_quantize(code, 3).counts) == [1, 1, 1]

    def test_largest_remainder_by_hand(self):
        code = SimplexCode(np.array([0.5, 0.3, 0.2]), 1.0)
        assert list(integer_quantize(code, 10).counts) == [5, 3, 2]

    def test_apportionment_bound(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            k = int(rng.integers(2, 12))
            p = rng.dirichlet(np.ones(k))
            resolution = int(rng.integers(1, 40))
            quantized = integer_quantize(SimplexCode(p, 1.0), resolution)
            assert int(quantized.counts.sum()) == resolution
            assert np.max(np.abs(quantized.counts / resolution - p)) <= 1.0 / resolution + 1e-12

    def test_quantization_error_bound(self):
        rng = np.random.default_rng(33)
        vectors = rng.normal(size=(2, 6))
        fam = family_from(*vectors.T)
        x = np.zeros(2)
        for resolution in (1, 5, 50):
            target = vectors @ rng.uniform(0.0, 1.0, size=6)
            code = simplex_compress(fam, target)
            quantized = integer_quantize(code, resolution)
            approx = SimplexCode(quantized.counts / resolution, code.flow_time)
            gap = simplex_decompress(fam, x, code) - simplex_decompress(fam, x, approx)
            bound = code.flow_time * max(np.linalg.norm(v) for v in vectors.T) * 6 / resolution
            assert float(np.linalg.norm(gap)) <= bound + 1e-12

    def test_code_count_matches_enumeration(self):
        # stars and bars: count vectors of K nonnegative ints summing to N
        brute = sum(
            1
            for counts in itertools.product(range(5), repeat=3)
            if sum(counts) == 4
        )
        assert integer_code_count(3, 4) == brute == math.comb(6, 2)

    def test_integer_decompress_flow_time_choices(self):
        from lincoder import integer_decompress

        fam = family_from([1.0, 0.0], [0.0, 1.0])
        code = simplex_compress(fam, [0.6, 0.2])
        quantized = integer_quantize(code, 4)
        carried = integer_decompress(fam, [0.0, 0.0], quantized, code.flow_time)
        assert np.allclose(carried, code.flow_time * (quantized.counts / 4))
        # full-interval convention: the caller passes the sampling interval
        full = integer_decompress(fam, [0.0, 0.0], quantized, 1.0)
        assert np.allclose(full, quantized.counts / 4)


def single_field_dataset(vector, flow_time, steps, trials):
    """Deterministic dataset whose every increment is flow_time * vector."""
    vector = np.asarray(vector, dtype=float)
    start = np.zeros_like(vector)
    path = np.array([start + k * flow_time * vector for k in range(steps + 1)])
    states = np.broadcast_to(path, (trials, steps + 1, vector.size)).copy()
    return TrajectoryDataset(0.1, states)


class TestEmulate:
    def test_single_field_flow_is_reproduced_exactly(self):
        fam = family_from([1.0, 2.0], [0.0, -1.0])
        data = single_field_dataset([1.0, 2.0], 0.05, steps=10, trials=4)
        result = emulate(data, fam, resolution=7, seed=42)
        assert result.infeasible_count == 0
        assert np.max(np.abs(result.states - data.states[0])) <= 1e-12

    def test_determinism(self):
        model = LinearSystemModel.constant([[-0.5, 1.0], [-1.0, -0.5]], 0.01 * np.eye(2))
        data = sample_paths(model, [1.0, 1.0], 0.01, steps=30, trials=8, seed=3)
        fam = planar_grid_family()
        a = emulate(data, fam, resolution=50, seed=77)
        b = emulate(data, fam, resolution=50, seed=77)
        assert np.array_equal(a.states, b.states)
        c = emulate(data, fam, resolution=50, seed=78)
        assert not np.array_equal(a.states, c.states)

    def test_starts_at_mean_initial_state(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0])
        states = np.zeros((2, 3, 2))
        states[0, :, :] = [[0.0, 0.0], [0.1, 0.0], [0.2, 0.0]]
        states[1, :, :] = [[2.0, 2.0], [2.1, 2.0], [2.2, 2.0]]
        data = TrajectoryDataset(0.1, states)
        result = emulate(data, fam, resolution=5, seed=0)
        assert np.allclose(result.states[0], [1.0, 1.0])

    def test_infeasible_increments_are_skipped_and_counted(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0])  # cone = first quadrant
        states = np.zeros((2, 2, 2))
        states[0, 1] = [0.5, 0.5]  # feasible increment
        states[1, 1] = [-1.0, 0.0]  # infeasible increment
        data = TrajectoryDataset(0.1, states)
        codes = compress_dataset(data, fam)
        assert codes.infeasible_count == 1
        assert codes.feasible_trials[0] == 1
        # averaged code reflects the feasible trial only
        assert codes.flow_times[0] == pytest.approx(1.0, abs=1e-9)

    def test_all_infeasible_step_holds_still(self):
        fam = family_from([1.0, 0.0], [0.0, 1.0])
        states = np.zeros((1, 2, 2))
        states[0, 1] = [-1.0, -1.0]
        data = TrajectoryDataset(0.1, states)
        result = emulate(data, fam, resolution=3, seed=5)
        assert result.infeasible_count == 1
        assert np.array_equal(result.states[1], result.states[0])

    def test_multinomial_variance_scales_inversely_with_resolution(self):
        from lincoder import StepCodes

        fam = family_from([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0])
        p = np.tile(np.array([0.4, 0.3, 0.2, 0.1]), (1, 1))
        codes = StepCodes(p, np.array([1.0]), np.array([1]), np.array([0]))
        draws = 400

        def increment_variance(resolution):
            increments = np.array(
                [
                    np.diff(emulate_steps(codes, fam, [0.0, 0.0], resolution, seed), axis=0)[0]
                    for seed in range(draws)
                ]
            )
            return increments.var(axis=0).sum()

        v_small = increment_variance(4)
        v_large = increment_variance(64)
        assert v_small / v_large == pytest.approx(16.0, rel=0.35)

    def test_dimension_mismatch_rejected(self):
        fam = family_from([1.0])
        data = single_field_dataset([1.0, 0.0], 0.1, steps=2, trials=1)
        with pytest.raises(ValueError):
            emulate(data, fam, resolution=3, seed=0)
