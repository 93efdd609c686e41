import io
import math

import numpy as np
import pytest

import cwsketch as cw
from cwsketch import KernelKind, SparseVector, gram


def vec(*values):
    return SparseVector.from_dense(values)


class TestMinMax:
    def test_hand_computed(self):
        # (min(1,2)+min(2,1)+min(0,1)) / (max(1,2)+max(2,1)+max(0,1)) = 2/5
        assert cw.min_max(vec(1, 2, 0), vec(2, 1, 1)) == 0.4

    def test_identical_vectors(self):
        u = vec(0.5, 0, 3)
        assert cw.min_max(u, u) == 1.0

    def test_disjoint_supports(self):
        assert cw.min_max(vec(3, 0), vec(0, 5)) == 0.0

    def test_one_empty_side_is_zero(self):
        assert cw.min_max(vec(0, 0), vec(1, 2)) == 0.0

    def test_both_empty_is_error(self):
        with pytest.raises(ValueError, match="0/0"):
            cw.min_max(SparseVector(3), SparseVector(3))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            cw.min_max(vec(1, 2), vec(1, 2, 3))

    def test_scale_invariance(self):
        rs = np.random.default_rng(5)
        u = SparseVector.from_dense(np.exp(rs.standard_normal(12)) * (rs.random(12) < 0.7))
        v = SparseVector.from_dense(np.exp(rs.standard_normal(12)) * (rs.random(12) < 0.7))
        base = cw.min_max(u, v)
        for c in (2.0, 1e-8, 1e8, 0.3333333333333333):
            assert cw.min_max(u.scaled(c), v.scaled(c)) == pytest.approx(base, abs=1e-12)


class TestResemblance:
    def test_hand_computed(self):
        # supports {0,1} and {0,1,2}: 2 shared of 3 total
        assert cw.resemblance(vec(1, 2, 0), vec(2, 1, 1)) == 2 / 3

    def test_identical(self):
        u = vec(1, 0, 4)
        assert cw.resemblance(u, u) == 1.0

    def test_binary_collapse_exact(self):
        # on 0/1 data the weighted and set ratios are the same integers
        rs = np.random.default_rng(11)
        for _ in range(50):
            u = SparseVector.from_dense((rs.random(16) < 0.4).astype(float))
            v = SparseVector.from_dense((rs.random(16) < 0.4).astype(float))
            if u.is_empty() and v.is_empty():
                continue
            assert cw.min_max(u, v) == cw.resemblance(u, v)


class TestIntersection:
    def test_hand_computed(self):
        assert cw.intersection(vec(0.5, 0.5), vec(0.25, 0.75)) == 0.75

    def test_identical_normalized(self):
        u = vec(0.25, 0.75)
        assert cw.intersection(u, u) == 1.0

    def test_disjoint(self):
        assert cw.intersection(vec(1.0, 0), vec(0, 1.0)) == 0.0

    def test_unnormalized_rejected_with_sum(self):
        with pytest.raises(ValueError, match=r"right.*sum-to-one.*sum=3.0"):
            cw.intersection(vec(0.5, 0.5), vec(1, 2))


class TestNMinMax:
    def test_hand_computed(self):
        # (0.25+0.5)/(0.5+0.75) = 0.6
        assert cw.n_min_max(vec(0.5, 0.5), vec(0.25, 0.75)) == 0.6

    def test_identical_normalized(self):
        u = vec(0.1, 0.9)
        assert cw.n_min_max(u, u) == 1.0

    def test_normalization_changes_the_kernel(self):
        # raw (1,2) vs (2,4) gives 0.5; sum-to-one both become (1/3, 2/3)
        u, v = vec(1, 2), vec(2, 4)
        assert cw.min_max(u, v) == 0.5
        un = u.scaled(1 / u.weight_sum())
        vn = v.scaled(1 / v.weight_sum())
        assert cw.n_min_max(un, vn) == pytest.approx(1.0, abs=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="left"):
            cw.n_min_max(vec(1, 2), vec(0.5, 0.5))


class TestLinear:
    def test_identical_unit(self):
        u = vec(0.6, 0.8)
        assert cw.linear(u, u) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cw.linear(vec(1, 0), vec(0, 1)) == 0.0

    def test_hand_computed(self):
        s = 1 / math.sqrt(2)
        assert cw.linear(vec(1, 0), vec(s, s)) == pytest.approx(s, abs=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="unit-l2"):
            cw.linear(vec(1, 1), vec(1, 0))


def _dense_reference(u, v, kind):
    """Independent brute-force loop over all D coordinates."""
    du, dv = u.to_dense(), v.to_dense()
    if kind is KernelKind.RESEMBLANCE:
        du, dv = (du > 0).astype(float), (dv > 0).astype(float)
    if kind is KernelKind.LINEAR:
        return sum(float(a * b) for a, b in zip(du, dv))
    mins = sum(min(float(a), float(b)) for a, b in zip(du, dv))
    if kind is KernelKind.INTERSECTION:
        return mins
    maxs = sum(max(float(a), float(b)) for a, b in zip(du, dv))
    return mins / maxs


def _random_vectors(rs, n, dim, normalize=None):
    out = []
    while len(out) < n:
        dense = np.exp(1.5 * rs.standard_normal(dim)) * (rs.random(dim) < 0.5)
        v = SparseVector.from_dense(dense)
        if v.is_empty():
            continue
        if normalize == "sum1":
            v = v.scaled(1 / v.weight_sum())
        elif normalize == "l2":
            v = v.scaled(1 / v.l2_norm())
        out.append(v)
    return out


NORMALIZATION_FOR = {
    KernelKind.MIN_MAX: None,
    KernelKind.RESEMBLANCE: None,
    KernelKind.N_MIN_MAX: "sum1",
    KernelKind.INTERSECTION: "sum1",
    KernelKind.LINEAR: "l2",
}


@pytest.mark.parametrize("kind", list(KernelKind))
def test_sparse_matches_dense_brute_force(kind):
    rs = np.random.default_rng(17)
    vecs = _random_vectors(rs, 12, 24, NORMALIZATION_FOR[kind])
    for u in vecs[:6]:
        for v in vecs[6:]:
            expected = _dense_reference(u, v, kind)
            assert cw.kernel_value(u, v, kind) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("kind", list(KernelKind))
def test_symmetry_and_range(kind):
    rs = np.random.default_rng(23)
    vecs = _random_vectors(rs, 10, 16, NORMALIZATION_FOR[kind])
    for u in vecs[:5]:
        for v in vecs[5:]:
            a = cw.kernel_value(u, v, kind)
            assert a == cw.kernel_value(v, u, kind)
            if kind is KernelKind.LINEAR:
                assert -1 - 1e-12 <= a <= 1 + 1e-12
            else:
                assert 0.0 <= a <= 1.0


class TestGram:
    def test_single_identical_pair(self):
        u = vec(1, 2)
        g = gram([u], [u], KernelKind.MIN_MAX)
        assert g.values.tolist() == [[1.0]]

    def test_disjoint_pair(self):
        g = gram([vec(3, 0)], [vec(0, 5)], KernelKind.MIN_MAX)
        assert g.values.tolist() == [[0.0]]

    def test_three_by_three_hand_computed(self):
        vs = [vec(1, 0), vec(0, 1), vec(1, 1)]
        g = gram(vs, vs, KernelKind.MIN_MAX)
        expected = [[1, 0, 0.5], [0, 1, 0.5], [0.5, 0.5, 1]]
        assert g.values.tolist() == expected

    @pytest.mark.parametrize("kind", list(KernelKind))
    def test_matches_pair_function(self, kind):
        rs = np.random.default_rng(31)
        left = _random_vectors(rs, 5, 20, NORMALIZATION_FOR[kind])
        right = _random_vectors(rs, 7, 20, NORMALIZATION_FOR[kind])
        g = gram(left, right, kind)
        assert g.rows == 5 and g.cols == 7
        for a, u in enumerate(left):
            for b, v in enumerate(right):
                assert g.values[a, b] == pytest.approx(
                    cw.kernel_value(u, v, kind), abs=1e-12)

    def test_thread_count_does_not_change_values(self):
        rs = np.random.default_rng(37)
        vecs = _random_vectors(rs, 16, 20)
        g1 = gram(vecs, vecs, KernelKind.MIN_MAX, threads=1)
        g4 = gram(vecs, vecs, KernelKind.MIN_MAX, threads=4)
        assert np.array_equal(g1.values, g4.values)

    def test_merge_fallback_matches_dense(self, monkeypatch):
        import cwsketch.kernels as kmod
        rs = np.random.default_rng(41)
        vecs = _random_vectors(rs, 6, 20)
        dense = gram(vecs, vecs, KernelKind.MIN_MAX).values
        monkeypatch.setattr(kmod, "_DENSE_BUDGET", 0)
        merged = gram(vecs, vecs, KernelKind.MIN_MAX).values
        assert np.allclose(dense, merged, atol=1e-12, rtol=0)

    def test_symmetric_unit_diagonal(self):
        rs = np.random.default_rng(43)
        vecs = _random_vectors(rs, 8, 16)
        g = gram(vecs, vecs, KernelKind.MIN_MAX)
        assert np.array_equal(g.values, g.values.T)
        assert np.all(np.diag(g.values) == 1.0)

    @pytest.mark.parametrize("kind", [KernelKind.N_MIN_MAX, KernelKind.LINEAR,
                                      KernelKind.RESEMBLANCE])
    def test_unit_diagonal_other_kinds(self, kind):
        rs = np.random.default_rng(47)
        vecs = _random_vectors(rs, 6, 12, NORMALIZATION_FOR[kind])
        g = gram(vecs, vecs, kind)
        assert np.array_equal(g.values, g.values.T)
        assert np.allclose(np.diag(g.values), 1.0, atol=1e-12, rtol=0)

    def test_error_carries_row_col_context(self):
        good, empty = vec(1, 0), SparseVector(2)
        with pytest.raises(ValueError, match="row 1, col 0"):
            gram([good, empty], [empty], KernelKind.MIN_MAX)

    def test_dimension_mismatch_names_row(self):
        with pytest.raises(ValueError, match="right row 1"):
            gram([vec(1, 0)], [vec(0, 1), SparseVector(3, (0,), (1.0,))],
                 KernelKind.MIN_MAX)


class TestPrecomputedFormat:
    def test_layout(self):
        vs = [vec(1, 0), vec(0, 1), vec(1, 1)]
        g = gram(vs, vs, KernelKind.MIN_MAX)
        buf = io.StringIO()
        cw.write_precomputed(g, [1, -1, 1], buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "1 0:1 1:1.0 2:0.0 3:0.5"
        assert lines[1] == "-1 0:2 1:0.0 2:1.0 3:0.5"
        assert lines[2] == "1 0:3 1:0.5 2:0.5 3:1.0"

    def test_label_count_must_match(self):
        g = gram([vec(1, 0)], [vec(1, 0)], KernelKind.MIN_MAX)
        with pytest.raises(ValueError, match="label count"):
            cw.write_precomputed(g, [1, 2], io.StringIO())
