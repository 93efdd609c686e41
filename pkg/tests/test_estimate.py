import io
import math

import pytest

import cwsketch as cw
from cwsketch import BitBudget, Scheme, SparseVector
from synth import pair_with_kernel


def vec(*values):
    return SparseVector.from_dense(values)


class TestScheme:
    def test_full(self):
        assert Scheme.full().budget is None
        assert Scheme.full().name == "full"

    def test_zero_bit_widths(self):
        # wide enough to code every coordinate: ceil(log2 D), floor of 1
        assert Scheme.zero_bit(64).budget == BitBudget(6, 0)
        assert Scheme.zero_bit(100).budget == BitBudget(7, 0)
        assert Scheme.zero_bit(1).budget == BitBudget(1, 0)

    def test_t_bits_name(self):
        assert Scheme.t_bits(64, 1).name == "1bit"
        assert Scheme.t_bits(64, 1).budget == BitBudget(6, 1)

    def test_truncated(self):
        s = Scheme.truncated(BitBudget(1, 0))
        assert s.name == "bi1bt0"
        with pytest.raises(ValueError, match="bi \\+ bt >= 1"):
            Scheme.truncated(BitBudget(0, 0))


class TestCollisionRate:
    def test_identical_sketches(self):
        sk = cw.sketch(vec(1, 2, 3), 50, 8)
        for scheme in (Scheme.full(), Scheme.zero_bit(3), Scheme.t_bits(3, 1)):
            assert cw.collision_rate(sk, sk, scheme) == 1.0

    def test_disjoint_supports_full_rate_zero(self):
        # istar lives in the support, so disjoint supports can never collide
        su = cw.sketch(vec(1, 1, 0, 0), 500, 3)
        sv = cw.sketch(vec(0, 0, 1, 1), 500, 3)
        assert cw.collision_rate(su, sv, Scheme.full()) == 0.0
        assert cw.collision_rate(su, sv, Scheme.zero_bit(4)) == 0.0

    def test_known_half_kernel(self):
        u, v = vec(1, 2), vec(2, 1)
        k = 100_000
        su, sv = cw.sketch(u, k, 13), cw.sketch(v, k, 13)
        rate = cw.collision_rate(su, sv, Scheme.full())
        assert abs(rate - 0.5) <= 4 * math.sqrt(0.25 / k)

    def test_seed_mismatch_rejected(self):
        su = cw.sketch(vec(1, 2), 10, 1)
        sv = cw.sketch(vec(1, 2), 10, 2)
        with pytest.raises(ValueError, match="not comparable"):
            cw.collision_rate(su, sv, Scheme.full())

    def test_k_mismatch_rejected(self):
        su = cw.sketch(vec(1, 2), 10, 1)
        sv = cw.sketch(vec(1, 2), 11, 1)
        with pytest.raises(ValueError, match="not comparable"):
            cw.collision_rate(su, sv, Scheme.full())


class TestTheoreticalVariance:
    def test_hand_computed(self):
        assert cw.theoretical_variance(0.5, 100) == 0.0025

    def test_degenerate_kernels(self):
        assert cw.theoretical_variance(0.0, 7) == 0.0
        assert cw.theoretical_variance(1.0, 7) == 0.0

    def test_word_pair_value(self):
        # kernel 0.8985 at k=1: 0.8985 * 0.1015 = 0.09119775
        assert cw.theoretical_variance(0.8985, 1) == pytest.approx(0.09120, abs=5e-6)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="K must be"):
            cw.theoretical_variance(1.5, 10)
        with pytest.raises(ValueError, match="k must be"):
            cw.theoretical_variance(0.5, 0)


class TestSimulate:
    def test_k_one_mse_is_bernoulli_variance(self):
        u, v = pair_with_kernel(0.35, 32, 7)
        K = cw.min_max(u, v)
        n_reps = 3000
        rep = cw.simulate(u, v, [1], [Scheme.full()], n_reps, 99)
        row = rep.rows[0]
        # closed-form oracle: MSE of a single Bernoulli draw is K(1-K)
        tol = 4 * math.sqrt(2 / n_reps) * K * (1 - K)
        assert abs(row.mse - K * (1 - K)) <= tol

    def test_full_scheme_unbiased(self):
        u, v = pair_with_kernel(0.6, 32, 8)
        K = cw.min_max(u, v)
        n_reps = 3000
        rep = cw.simulate(u, v, [1, 8], [Scheme.full()], n_reps, 5)
        for row in rep.rows:
            tol = 4 * math.sqrt(K * (1 - K) / (row.k * n_reps))
            assert abs(row.bias) <= tol

    def test_starved_istar_bits_bias_upward(self):
        u, v = pair_with_kernel(0.3, 100, 9)
        rep = cw.simulate(u, v, [64], [Scheme.truncated(BitBudget(1, 0))], 400, 17)
        assert rep.rows[0].bias > 0.1

    def test_zero_bit_rate_never_below_full(self):
        u, v = pair_with_kernel(0.5, 64, 10)
        k = 2000
        for seed in range(5):
            su, sv = cw.sketch(u, k, seed), cw.sketch(v, k, seed)
            full = cw.collision_rate(su, sv, Scheme.full())
            zero = cw.collision_rate(su, sv, Scheme.zero_bit(64))
            assert zero >= full

    def test_deterministic(self):
        u, v = vec(1, 2, 3), vec(3, 2, 1)
        args = (u, v, [1, 4], [Scheme.full(), Scheme.zero_bit(3)], 200, 77)
        assert cw.simulate(*args) == cw.simulate(*args)

    def test_chunking_does_not_change_report(self, monkeypatch):
        import cwsketch.estimate as emod
        u, v = vec(1, 2, 3), vec(3, 2, 1)
        args = (u, v, [4], [Scheme.full()], 100, 3)
        whole = cw.simulate(*args)
        monkeypatch.setattr(emod, "_ELEMENT_BUDGET", 64)
        chunked = cw.simulate(*args)
        assert whole == chunked

    def test_stored_theoretical_variance_recomputes(self):
        u, v = vec(1, 2), vec(2, 1)
        rep = cw.simulate(u, v, [1, 4, 16], [Scheme.full()], 50, 21)
        for row in rep.rows:
            assert row.theoretical_var == cw.theoretical_variance(rep.exact, row.k)

    def test_validation(self):
        u, v = vec(1, 2), vec(2, 1)
        with pytest.raises(ValueError, match="k_grid"):
            cw.simulate(u, v, [], [Scheme.full()], 10, 1)
        with pytest.raises(ValueError, match="n_reps"):
            cw.simulate(u, v, [1], [Scheme.full()], 0, 1)
        with pytest.raises(ValueError, match="scheme"):
            cw.simulate(u, v, [1], [], 10, 1)


class TestCsv:
    def test_layout(self):
        u, v = vec(1, 2), vec(2, 1)
        rep = cw.simulate(u, v, [2], [Scheme.full()], 10, 5, pair_id="p0")
        buf = io.StringIO()
        cw.write_csv([rep], buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "pair,k,scheme,bias,mse,theoretical_var,n_reps"
        fields = lines[1].split(",")
        assert fields[0] == "p0" and fields[1] == "2" and fields[2] == "full"
        assert float(fields[5]) == 0.125  # 0.5*0.5/2
        assert fields[6] == "10"

    def test_byte_identical(self):
        u, v = vec(1, 2), vec(2, 1)
        rep = cw.simulate(u, v, [2], [Scheme.full()], 10, 5)
        a, b = io.StringIO(), io.StringIO()
        cw.write_csv([rep], a)
        cw.write_csv([rep], b)
        assert a.getvalue() == b.getvalue()
