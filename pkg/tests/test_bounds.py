import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipbounds.bounds import (
    VARIANTS,
    all_bounds,
    bounds_batch,
    kappa_norm,
    linear_lower,
    linear_upper,
    m_norm,
    norm_linear_lower,
    norm_linear_upper,
    norm_quadratic_lower,
    norm_quadratic_upper,
    quadratic_lower,
    quadratic_upper,
    symmetric_linear_lower,
    symmetric_linear_upper,
    symmetric_quadratic_lower,
    symmetric_quadratic_upper,
)
from lipbounds.core import CurvatureBox, DomainError, LipschitzBox, Segment

# -- independent oracles ----------------------------------------------------


def rect_min_dot(lo, hi, d, per_axis=41):
    """Brute-force min of g . d over the rectangle lo <= g <= hi."""
    axes = [np.linspace(l, h, per_axis) for l, h in zip(lo, hi)]
    G = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
    return float((G @ d).min())


def vertex_quadratic_extremes(lo, hi, d):
    """Min and max of 0.5 d^T H d over entrywise intervals, by vertex enumeration."""
    n = len(d)
    vals = []
    for choice in itertools.product((0, 1), repeat=n * n):
        H = np.where(np.array(choice).reshape(n, n) == 0, lo, hi)
        vals.append(0.5 * d @ H @ d)
    return min(vals), max(vals)


def sign_case_linear(d, lo, hi):
    """Per-coordinate bounds written as explicit sign cases."""
    lower = upper = 0.0
    for di, l, h in zip(d, lo, hi):
        if di >= 0:
            lower += l * di
            upper += h * di
        else:
            lower += h * di
            upper += l * di
    return lower, upper


def sign_case_quadratic(g, d, lo, hi):
    lower = upper = float(np.dot(g, d))
    n = len(d)
    for i in range(n):
        for j in range(n):
            p = d[i] * d[j]
            if p >= 0:
                lower += 0.5 * lo[i][j] * p
                upper += 0.5 * hi[i][j] * p
            else:
                lower += 0.5 * hi[i][j] * p
                upper += 0.5 * lo[i][j] * p
    return lower, upper


def random_constants(rng, n):
    a, b = rng.normal(size=(2, n)) * 3
    klo, khi = np.minimum(a, b), np.maximum(a, b)
    A, B = rng.normal(size=(2, n, n)) * 3
    A, B = A + A.T, B + B.T
    mlo, mhi = np.minimum(A, B), np.maximum(A, B)
    return LipschitzBox(klo, khi), CurvatureBox(mlo, mhi)


# -- examples ------------------------------------------------------------------


def test_zero_displacement_gives_zero():
    seg = Segment((0.3, -1.2), (0.3, -1.2))
    k = LipschitzBox([-1, 2], [3, 5])
    m = CurvatureBox([[-1, 0], [0, 2]], [[1, 3], [3, 4]])
    g = np.array([7.0, -2.0])
    for value in all_bounds(seg, g, k, m).values():
        assert value == 0.0


def test_linear_1d_example():
    seg = Segment((0.0,), (1.0,))
    k = LipschitzBox([-2.0], [2.0])
    assert linear_lower(seg, k) == -2.0
    assert linear_upper(seg, k) == 2.0
    # dense sampling of f'(x) = 2x on [0, 1] stays in the interval
    assert np.all(np.abs(2 * np.linspace(0, 1, 1001)) <= 2.0)
    assert -2.0 <= 1.0 <= 2.0  # delta of x^2 over [0, 1]


def test_linear_2d_example_against_rectangle_oracle():
    seg = Segment((0.0, 0.0), (1.0, -1.0))
    k = LipschitzBox([1.0, -1.0], [3.0, 2.0])
    expected = rect_min_dot(k.lo, k.hi, seg.d)
    assert expected == -1.0
    assert linear_lower(seg, k) == expected


def test_quadratic_exact_on_square():
    seg = Segment((0.0,), (1.0,))
    m = CurvatureBox([[2.0]], [[2.0]])
    assert quadratic_lower(seg, [0.0], m) == 1.0
    assert quadratic_upper(seg, [0.0], m) == 1.0


def test_quadratic_2d_example_against_vertex_oracle():
    seg = Segment((0.0, 0.0), (1.0, 1.0))
    lo, hi = -np.ones((2, 2)), np.ones((2, 2))
    qmin, qmax = vertex_quadratic_extremes(lo, hi, seg.d)
    assert (qmin, qmax) == (-2.0, 2.0)
    m = CurvatureBox(lo, hi)
    assert quadratic_lower(seg, [1.0, 0.0], m) == 1.0 + qmin == -1.0
    assert quadratic_upper(seg, [1.0, 0.0], m) == 1.0 + qmax


def test_degenerate_curvature_closes_the_gap(rng):
    H = rng.normal(size=(3, 3))
    H = H + H.T
    m = CurvatureBox.degenerate(H)
    seg = Segment(rng.normal(size=3), rng.normal(size=3))
    g = rng.normal(size=3)
    assert quadratic_upper(seg, g, m) - quadratic_lower(seg, g, m) == pytest.approx(0.0, abs=1e-12)


def test_symmetric_examples():
    seg = Segment((0.0,), (1.0,))
    assert symmetric_linear_lower(seg, [2.0]) == -2.0
    assert symmetric_linear_upper(seg, [2.0]) == 2.0
    assert linear_lower(seg, LipschitzBox.symmetric([2.0])) == -2.0
    seg2 = Segment((0.0, 0.0), (-1.0, 3.0))
    assert symmetric_linear_lower(seg2, [1.0, 2.0]) == -7.0
    assert symmetric_quadratic_lower(seg, [0.0], [[2.0]]) == -1.0
    assert symmetric_quadratic_upper(seg, [0.0], [[2.0]]) == 1.0


def test_symmetric_input_validation():
    seg = Segment((0.0, 0.0), (1.0, 1.0))
    with pytest.raises(DomainError):
        symmetric_linear_lower(seg, [-1.0, 1.0])
    with pytest.raises(DomainError):
        symmetric_quadratic_lower(seg, [0, 0], [[1.0, -1.0], [-1.0, 1.0]])
    with pytest.raises(DomainError):
        symmetric_quadratic_upper(seg, [0, 0], [[1.0, 2.0], [1.0, 1.0]])
    with pytest.raises(DomainError):
        norm_linear_lower(seg, -1.0)


@pytest.mark.parametrize("k, expected", [([2.0], 2.0), ([1.0, 3.0, 2.0], 3.0), ([0.7] * 4, 0.7)])
def test_kappa_norm(k, expected):
    assert kappa_norm(k) == expected


@pytest.mark.parametrize("m, expected", [
    ([[2.0]], 2.0),
    ([[1.0, 2.0], [2.0, 1.0]], 3.0),
    ([[4.0, 0.0], [0.0, 9.0]], 9.0),
])
def test_m_norm(m, expected):
    assert m_norm(m) == expected


def test_norm_examples():
    seg = Segment((0.0, 0.0), (1.0, -1.0))
    assert norm_linear_lower(seg, 3.0) == -6.0
    assert norm_linear_upper(seg, 3.0) == 6.0
    one = Segment((0.0,), (1.0,))
    assert norm_quadratic_lower(one, [0.0], 2.0) == -1.0
    assert norm_quadratic_upper(one, [0.0], 2.0) == 1.0


def test_dimension_mismatch():
    k = LipschitzBox([0, 0], [1, 1])
    with pytest.raises(DomainError):
        linear_lower(Segment((0.0,), (1.0,)), k)
    m = CurvatureBox(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(DomainError):
        quadratic_lower(Segment((0.0, 0.0), (1.0, 1.0)), [1.0], m)


def test_cubic_local_constants_tighten_upper_bound():
    # f = x^3 on [-1, 1]: f' = 3x^2 in [0, 3]; on [0, 0.5] it is in [0, 0.75]
    seg = Segment((0.0,), (0.5,))
    global_k = LipschitzBox([0.0], [3.0])
    local_k = LipschitzBox([0.0], [0.75])
    assert linear_upper(seg, global_k) == 1.5
    assert linear_upper(seg, local_k) == 0.375
    assert 0.5**3 <= 0.375


# -- properties ----------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_min_max_matches_sign_case_analysis(rng, n):
    for _ in range(200):
        k, m = random_constants(rng, n)
        a, b = rng.normal(size=(2, n))
        if rng.random() < 0.3:
            b[rng.integers(n)] = a[rng.integers(n)]
        seg = Segment(a, b)
        g = rng.normal(size=n)
        lo, hi = sign_case_linear(seg.d, k.lo, k.hi)
        assert linear_lower(seg, k) == pytest.approx(lo, abs=1e-12)
        assert linear_upper(seg, k) == pytest.approx(hi, abs=1e-12)
        qlo, qhi = sign_case_quadratic(g, seg.d, m.lo, m.hi)
        assert quadratic_lower(seg, g, m) == pytest.approx(qlo, rel=1e-12, abs=1e-12)
        assert quadratic_upper(seg, g, m) == pytest.approx(qhi, rel=1e-12, abs=1e-12)


def test_antisymmetry(rng):
    for _ in range(500):
        n = rng.integers(1, 6)
        k, _ = random_constants(rng, n)
        seg = Segment(rng.normal(size=n), rng.normal(size=n))
        assert linear_upper(seg.reversed(), k) + linear_lower(seg, k) == pytest.approx(0.0, abs=1e-12)


def test_translation_invariance(rng):
    for _ in range(200):
        n = rng.integers(1, 5)
        k, _ = random_constants(rng, n)
        a, b, shift = rng.normal(size=(3, n))
        s1, s2 = Segment(a, b), Segment(a + shift, a + shift + (b - a))
        assert linear_lower(s1, k) == pytest.approx(linear_lower(s2, k), abs=1e-12)
        assert linear_upper(s1, k) == pytest.approx(linear_upper(s2, k), abs=1e-12)


def test_general_with_symmetric_intervals_equals_symmetric_form(rng):
    for _ in range(300):
        n = rng.integers(1, 5)
        c = np.abs(rng.normal(size=n))
        C = np.abs(rng.normal(size=(n, n)))
        C = C + C.T
        seg = Segment(rng.normal(size=n), rng.normal(size=n))
        g = rng.normal(size=n)
        k, m = LipschitzBox.symmetric(c), CurvatureBox.symmetric(C)
        assert linear_lower(seg, k) == pytest.approx(symmetric_linear_lower(seg, c), abs=1e-12)
        assert linear_upper(seg, k) == pytest.approx(symmetric_linear_upper(seg, c), abs=1e-12)
        assert quadratic_lower(seg, g, m) == pytest.approx(symmetric_quadratic_lower(seg, g, C), abs=1e-12)
        assert quadratic_upper(seg, g, m) == pytest.approx(symmetric_quadratic_upper(seg, g, C), abs=1e-12)


def test_symmetric_dominates_norm(rng):
    for _ in range(300):
        n = rng.integers(1, 6)
        c = np.abs(rng.normal(size=n))
        C = np.abs(rng.normal(size=(n, n)))
        C = C + C.T
        seg = Segment(rng.normal(size=n), rng.normal(size=n))
        g = rng.normal(size=n)
        kn, mn = kappa_norm(c), m_norm(C)
        assert norm_linear_lower(seg, kn) <= symmetric_linear_lower(seg, c) + 1e-12
        assert norm_linear_upper(seg, kn) >= symmetric_linear_upper(seg, c) - 1e-12
        assert norm_quadratic_lower(seg, g, mn) <= symmetric_quadratic_lower(seg, g, C) + 1e-12
        assert norm_quadratic_upper(seg, g, mn) >= symmetric_quadratic_upper(seg, g, C) - 1e-12


def test_general_dominates_symmetric_view(rng):
    for _ in range(300):
        n = rng.integers(1, 5)
        k, m = random_constants(rng, n)
        seg = Segment(rng.normal(size=n), rng.normal(size=n))
        g = rng.normal(size=n)
        assert linear_lower(seg, k) >= symmetric_linear_lower(seg, k.sym()) - 1e-12
        assert quadratic_upper(seg, g, m) <= symmetric_quadratic_upper(seg, g, m.sym()) + 1e-12


def test_nested_constants_give_tighter_bounds(rng):
    for _ in range(300):
        n = rng.integers(1, 5)
        k, m = random_constants(rng, n)
        t = rng.random(size=(4, n))
        inner_k = LipschitzBox(k.lo + t[0] * (k.hi - k.lo) * 0.5, k.hi - t[1] * (k.hi - k.lo) * 0.5)
        T = rng.random(size=(n, n))
        T = 0.25 * (T + T.T)
        inner_m = CurvatureBox(m.lo + T * (m.hi - m.lo), m.hi - T * (m.hi - m.lo))
        seg = Segment(rng.normal(size=n), rng.normal(size=n))
        g = rng.normal(size=n)
        assert linear_lower(seg, inner_k) >= linear_lower(seg, k) - 1e-12
        assert linear_upper(seg, inner_k) <= linear_upper(seg, k) + 1e-12
        assert quadratic_lower(seg, g, inner_m) >= quadratic_lower(seg, g, m) - 1e-12
        assert quadratic_upper(seg, g, inner_m) <= quadratic_upper(seg, g, m) + 1e-12
        assert linear_lower(seg, k) == linear_lower(seg, LipschitzBox(k.lo, k.hi))


@settings(max_examples=300, deadline=None)
@given(
    st.integers(1, 4).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(-10, 10), min_size=n, max_size=n),
            st.lists(st.floats(-10, 10), min_size=n, max_size=n),
            st.lists(st.floats(-5, 5), min_size=n, max_size=n),
            st.lists(st.floats(0, 5), min_size=n, max_size=n),
        )
    )
)
def test_lower_never_exceeds_upper(data):
    a, b, klo, width = data
    k = LipschitzBox(klo, np.add(klo, width))
    seg = Segment(a, b)
    assert linear_lower(seg, k) <= linear_upper(seg, k)


def test_affine_function_exact_with_degenerate_kappa(rng):
    c = np.array([1.5, -0.7, 2.0])
    k = LipschitzBox.degenerate(c)
    for _ in range(100):
        a, b = rng.uniform(-3, 3, size=(2, 3))
        seg = Segment(a, b)
        delta = c @ b - c @ a
        assert linear_lower(seg, k) == pytest.approx(delta, abs=1e-12)
        assert linear_upper(seg, k) == pytest.approx(delta, abs=1e-12)


def test_all_bounds_matches_batch(rng, kernel):
    n = 3
    k, m = random_constants(rng, n)
    A, B, G = rng.normal(size=(3, 50, n))
    batch = bounds_batch(A, B, G, k.lo, k.hi, m.lo, m.hi, kernel=kernel)
    for r in range(50):
        ref = all_bounds(Segment(A[r], B[r]), G[r], k, m)
        got = dict(zip((v.name for v in VARIANTS), batch[r]))
        for name, value in ref.items():
            assert got[name] == pytest.approx(value, rel=1e-12, abs=1e-12), name


def test_batch_accepts_per_row_constants(rng, kernel):
    n, N = 2, 20
    A, B, G = rng.normal(size=(3, N, n))
    ks = [random_constants(rng, n) for _ in range(N)]
    klo = np.array([k.lo for k, _ in ks])
    khi = np.array([k.hi for k, _ in ks])
    mlo = np.array([m.lo for _, m in ks])
    mhi = np.array([m.hi for _, m in ks])
    out = bounds_batch(A, B, G, klo, khi, mlo, mhi, kernel=kernel)
    for r, (k, m) in enumerate(ks):
        assert out[r, 0] == pytest.approx(linear_lower(Segment(A[r], B[r]), k), abs=1e-12)
        assert out[r, 7] == pytest.approx(quadratic_upper(Segment(A[r], B[r]), G[r], m), abs=1e-12)


def test_variant_table_is_complete():
    names = {v.name for v in VARIANTS}
    assert len(names) == 12
    localized = {(v.localized().name, v.localized().locality) for v in VARIANTS}
    assert len(names | {n for n, _ in localized}) == 12
    assert {loc for _, loc in localized} == {"segment_local"}
