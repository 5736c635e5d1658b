import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fuzzy_rrt.fis import (
    GENOME_LENGTH,
    INPUT_RANGES,
    N_RULES,
    OUTPUT_NAMES,
    OUTPUT_RANGES,
    PARAMS_PER_FIS,
    PEAK_SEPARATION,
    EnvInputs,
    FisBank,
    GenomeError,
    InputUniverse,
    ModelFormatError,
    TskFis,
    bank_from_dict,
    bank_to_dict,
    constant_bank,
    decode,
    encode,
    evaluate_bank,
    infer,
    load_bank,
    membership,
    rule_index,
    save_bank,
)


def oracle_memberships(peaks, x):
    """Five memberships via piecewise-linear interpolation of one-hot peak values."""
    return np.array([np.interp(x, peaks, np.eye(5)[k]) for k in range(5)])


def oracle_infer(f, x):
    """Weighted average over all 625 rules, weights = product of memberships."""
    mus = [oracle_memberships(np.array(u.peaks), xi) for u, xi in zip(f.universes, x)]
    num = den = 0.0
    cons = f.consequents
    for i1 in range(5):
        for i2 in range(5):
            for i3 in range(5):
                for i4 in range(5):
                    w = mus[0][i1] * mus[1][i2] * mus[2][i3] * mus[3][i4]
                    num += w * cons[i1 * 125 + i2 * 25 + i3 * 5 + i4]
                    den += w
    lo, hi = f.output_range
    return min(max(num / den, lo), hi)


def random_universe(rng, lo=0.0, hi=1.0):
    while True:
        p = np.sort(rng.uniform(lo, hi, 3))
        if lo < p[0] < p[1] < p[2] < hi:
            return InputUniverse(lo, hi, tuple(p))


def random_fis(rng, out_range=(0.0, 10.0)):
    universes = tuple(random_universe(rng, lo, hi) for lo, hi in INPUT_RANGES)
    cons = rng.uniform(*out_range, N_RULES)
    return TskFis(universes, tuple(cons), out_range)


def random_inputs(rng):
    return tuple(rng.uniform(lo - 0.1, hi + 0.1) for lo, hi in INPUT_RANGES)


@pytest.fixture
def universe():
    return InputUniverse(0.0, 1.0, (0.2, 0.5, 0.7))


class TestCounts:
    def test_parameter_counts(self):
        assert N_RULES == 625
        assert PARAMS_PER_FIS == 637
        assert GENOME_LENGTH == 3822

    def test_rule_index_layout(self):
        assert rule_index(0, 0, 0, 0) == 0
        assert rule_index(4, 4, 4, 4) == 624
        assert rule_index(1, 2, 3, 4) == 125 + 50 + 15 + 4


class TestMembership:
    def test_apex(self, universe):
        assert membership(universe, 2, 0.5) == 1.0

    def test_left_shoulder(self, universe):
        assert membership(universe, 0, 0.0) == 1.0
        assert [membership(universe, k, 0.0) for k in range(1, 5)] == [0.0] * 4

    def test_clipped_outside_universe(self, universe):
        assert membership(universe, 0, -3.0) == 1.0
        assert membership(universe, 4, 7.0) == 1.0

    def test_crossover_midway(self, universe):
        x = 0.5 * (0.2 + 0.5)
        assert membership(universe, 1, x) == pytest.approx(0.5)
        assert membership(universe, 2, x) == pytest.approx(0.5)

    def test_bad_index(self, universe):
        with pytest.raises(IndexError):
            membership(universe, 5, 0.3)

    def test_invalid_peaks_rejected(self):
        with pytest.raises(ValueError):
            InputUniverse(0.0, 1.0, (0.5, 0.5, 0.7))
        with pytest.raises(ValueError):
            InputUniverse(0.0, 1.0, (0.0, 0.5, 0.7))

    def test_matches_interp_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(2000):
            u = random_universe(rng, -2.0, 3.0)
            x = rng.uniform(-2.5, 3.5)
            got = [membership(u, k, x) for k in range(5)]
            np.testing.assert_allclose(got, oracle_memberships(np.array(u.peaks), np.clip(x, -2, 3)), atol=1e-12)

    def test_partition_of_unity(self):
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(100_000 // 5):
            u = random_universe(rng, *INPUT_RANGES[rng.integers(4)])
            for x in rng.uniform(u.lo - 0.5, u.hi + 0.5, 5):
                worst = max(worst, abs(sum(membership(u, k, x) for k in range(5)) - 1.0))
        assert worst <= 1e-12


class TestInfer:
    def test_single_rule_at_lower_corner(self):
        f = random_fis(np.random.default_rng(2))
        assert infer(f, tuple(lo for lo, _ in INPUT_RANGES)) == pytest.approx(f.consequents[0], abs=1e-12)

    def test_two_rules_half_weight(self):
        universes = tuple(InputUniverse(lo, hi, (lo + 0.25 * (hi - lo), lo + 0.5 * (hi - lo), lo + 0.75 * (hi - lo)))
                          for lo, hi in INPUT_RANGES)
        cons = [0.0] * N_RULES
        cons[rule_index(0, 0, 0, 1)] = 10.0
        f = TskFis(universes, tuple(cons), (0.0, 10.0))
        x = (0.0, 0.0, 0.0, 0.125 * INPUT_RANGES[3][1])
        assert infer(f, x) == pytest.approx(5.0)

    def test_rule_ordering_is_input_major(self):
        rng = np.random.default_rng(4)
        f = random_fis(rng)
        for idx in (0, 7, 130, 624, 311):
            ks = (idx // 125, idx // 25 % 5, idx // 5 % 5, idx % 5)
            x = tuple(f.universes[i].peaks[k] for i, k in enumerate(ks))
            assert infer(f, x) == pytest.approx(f.consequents[idx], abs=1e-9)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(10_000):
            f = random_fis(rng) if rng.random() < 0.05 or _ == 0 else f
            x = random_inputs(rng)
            worst = max(worst, abs(infer(f, x) - oracle_infer(f, x)))
        assert worst <= 1e-10

    def test_convex_combination(self):
        rng = np.random.default_rng(6)
        for _ in range(10_000):
            if _ % 100 == 0:
                f = random_fis(rng)
                cmin, cmax = min(f.consequents), max(f.consequents)
            y = infer(f, random_inputs(rng))
            assert cmin - 1e-12 <= y <= cmax + 1e-12

    def test_lipschitz_continuity(self):
        rng = np.random.default_rng(8)
        delta = 1e-6
        for _ in range(500):
            f = random_fis(rng)
            crange = max(f.consequents) - min(f.consequents)
            lips = [crange / min(np.diff(u.peaks)) for u in f.universes]
            x = list(random_inputs(rng))
            y0 = infer(f, x)
            for i in range(4):
                xp = list(x)
                xp[i] += delta
                assert abs(infer(f, xp) - y0) <= lips[i] * delta * (1 + 1e-6) + 1e-12

    def test_infinite_distance_is_clipped(self):
        f = random_fis(np.random.default_rng(9))
        assert infer(f, (1.0, math.inf, 2.0, 0.3)) == infer(f, (1.0, 0.6, 2.0, 0.3))


class TestBank:
    def test_constant_goal_bias(self):
        bank = constant_bank(-10, 10, -20, 20, 4.0, 1.0)
        p = evaluate_bank(bank, EnvInputs(1.0, 0.2, 3.0, math.inf))
        assert p.bias == 1.0
        assert p.step == 4.0
        assert p.bounds == ((-10, 10), (-20, 20))

    def test_bounds_are_swapped_into_order(self):
        bank = constant_bank(50, -50, 30, 10, 4.0, 0.5)
        p = evaluate_bank(bank, EnvInputs(0.0, 0.0, 0.0, 0.0))
        assert p.bounds == ((-50, 50), (10, 30))

    def test_outputs_in_range(self):
        rng = np.random.default_rng(10)
        bank = decode(rng.random(GENOME_LENGTH))
        for _ in range(2000):
            e = EnvInputs(rng.uniform(0, 2 * math.pi), rng.uniform(0, 1.2), rng.uniform(0, 2 * math.pi),
                          rng.choice([math.inf, rng.uniform(0, 1)]))
            p = evaluate_bank(bank, e)
            assert 0 <= p.bias <= 1 and 0 <= p.step <= 10
            for lo, hi in p.bounds:
                assert -180 <= lo <= hi <= 180

    def test_composition_equals_direct_calls(self):
        rng = np.random.default_rng(11)
        bank = decode(rng.random(GENOME_LENGTH))
        e = EnvInputs(1.1, 0.33, 4.2, 0.05)
        # call order: (angle_to_obs, dist_to_obs, angle_to_goal, dist_to_goal)
        x = (4.2, 0.05, 1.1, 0.33)
        b1, b2, b3, b4, step, bias = (infer(f, x) for f in bank.fis)
        p = evaluate_bank(bank, e)
        assert p.bias == bias and p.step == step
        assert p.bounds == ((min(b1, b2), max(b1, b2)), (min(b3, b4), max(b3, b4)))

    def test_wrong_output_range_rejected(self):
        bank = constant_bank(0, 0, 0, 0, 1, 0.5)
        fis = list(bank.fis)
        fis[4] = TskFis(fis[4].universes, fis[4].consequents, (0.0, 20.0), "step_size")
        with pytest.raises(ValueError):
            FisBank(tuple(fis))

    def test_needs_six_systems(self):
        bank = constant_bank(0, 0, 0, 0, 1, 0.5)
        with pytest.raises(ValueError):
            FisBank(bank.fis[:5])


class TestGenome:
    def test_all_half_genome(self):
        bank = decode(np.full(GENOME_LENGTH, 0.5))
        for f, (olo, ohi) in zip(bank.fis, OUTPUT_RANGES):
            for u, (lo, hi) in zip(f.universes, INPUT_RANGES):
                mid, eps = lo + 0.5 * (hi - lo), PEAK_SEPARATION * (hi - lo)
                assert u.interior_peaks == pytest.approx((mid - eps, mid, mid + eps), rel=1e-12)
            assert set(f.consequents) == {0.5 * (olo + ohi)}
        assert _banks_close(decode(encode(bank)), bank)

    def test_wrong_length(self):
        with pytest.raises(GenomeError):
            decode(np.zeros(GENOME_LENGTH - 1))

    def test_non_finite(self):
        g = np.full(GENOME_LENGTH, 0.5)
        g[10] = np.nan
        with pytest.raises(GenomeError):
            decode(g)

    def test_round_trip_up_to_peak_order(self):
        rng = np.random.default_rng(12)
        g = rng.random(GENOME_LENGTH)
        back = encode(decode(g))
        for j in range(6):
            block, ref = back[j * 637:(j + 1) * 637], g[j * 637:(j + 1) * 637]
            for i in range(4):
                np.testing.assert_allclose(block[3 * i:3 * i + 3], np.sort(ref[3 * i:3 * i + 3]), atol=2e-3)
            np.testing.assert_allclose(block[12:], ref[12:], rtol=1e-12, atol=1e-15)

    def test_decode_encode_decode_is_stable(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            bank = decode(rng.random(GENOME_LENGTH))
            assert _banks_close(decode(encode(bank)), bank)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, GENOME_LENGTH, elements=st.sampled_from([0.0, 1.0, 0.5, 0.4999, 0.9995, 1e-9])))
    def test_decode_is_total(self, genes):
        bank = decode(genes)
        for f, (olo, ohi) in zip(bank.fis, OUTPUT_RANGES):
            assert all(olo <= c <= ohi for c in f.consequents)
            for u in f.universes:
                p = u.peaks
                assert all(a < b for a, b in zip(p, p[1:]))


def _banks_close(a, b, rel=1e-12):
    for fa, fb in zip(a.fis, b.fis):
        for ua, ub in zip(fa.universes, fb.universes):
            if not np.allclose(ua.interior_peaks, ub.interior_peaks, rtol=rel, atol=0):
                return False
        if not np.allclose(fa.consequents, fb.consequents, rtol=rel, atol=1e-300):
            return False
    return True


class TestModelFile:
    def test_bit_exact_round_trip(self, tmp_path):
        bank = decode(np.random.default_rng(14).random(GENOME_LENGTH))
        path = tmp_path / "model.json"
        save_bank(bank, path)
        assert load_bank(path) == bank
        first = path.read_bytes()
        save_bank(load_bank(path), path)
        assert path.read_bytes() == first

    def test_declares_outputs(self):
        data = bank_to_dict(constant_bank(0, 0, 0, 0, 1, 0.5))
        assert data["format_version"] == 1
        assert [o["name"] for o in data["outputs"]] == list(OUTPUT_NAMES)
        assert [tuple(o["range"]) for o in data["outputs"]] == list(OUTPUT_RANGES)

    @pytest.mark.parametrize("mutate", [
        lambda d: d.update(format_version=2),
        lambda d: d.update(extra=1),
        lambda d: d["outputs"][0]["peaks"][0].reverse(),
        lambda d: d["outputs"][5]["consequents"].__setitem__(3, 1.5),
        lambda d: d["outputs"][2]["consequents"].pop(),
        lambda d: d["outputs"].pop(),
        lambda d: d["outputs"][4].update(range=[0, 20]),
        lambda d: d["inputs"][0].update(name="angle"),
    ])
    def test_validation(self, mutate):
        data = bank_to_dict(decode(np.random.default_rng(15).random(GENOME_LENGTH)))
        data = json.loads(json.dumps(data))
        mutate(data)
        with pytest.raises(ModelFormatError):
            bank_from_dict(data)
