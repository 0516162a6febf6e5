import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entcrit import ops
from entcrit.ptrans import (
    commutator_suite,
    partial_transpose,
    pt_duality_check,
    transpose_modes,
    verify_pt_identities,
)
from entcrit.space import CompositeSpace, ModeSpec, OperatorMatrix
from entcrit.states import random_density, rng_stream

SPACES = [
    CompositeSpace.bosons(2, 2),
    CompositeSpace((ModeSpec.boson(1), ModeSpec.spin(1), ModeSpec.su11(1, 2))),
    CompositeSpace.spins(3, 0.5),
]


def random_op(space, seed, hermitian=False):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((space.dim, space.dim)) + 1j * rng.standard_normal((space.dim, space.dim))
    if hermitian:
        m = m + m.conj().T
    return OperatorMatrix(space, m)


subsets = st.sampled_from(SPACES).flatmap(
    lambda sp: st.tuples(
        st.just(sp),
        st.sets(st.integers(1, sp.n_modes), min_size=1),
        st.integers(0, 2**32 - 1),
    )
)


@settings(max_examples=40, deadline=None)
@given(subsets)
def test_involution(case):
    space, subset, seed = case
    x = random_op(space, seed)
    assert np.array_equal(partial_transpose(partial_transpose(x, subset), subset).data, x.data)


@settings(max_examples=40, deadline=None)
@given(subsets, st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity(case, alpha):
    space, subset, seed = case
    x, y = random_op(space, seed), random_op(space, seed + 1)
    lhs = partial_transpose(alpha * x + y, subset)
    rhs = alpha * partial_transpose(x, subset) + partial_transpose(y, subset)
    assert (lhs - rhs).max_abs() <= 1e-12 * max(1.0, abs(alpha))


@settings(max_examples=40, deadline=None)
@given(subsets)
def test_trace_and_hermiticity_preserved(case):
    space, subset, seed = case
    x = random_op(space, seed, hermitian=True)
    t = partial_transpose(x, subset)
    assert np.trace(t.data) == np.trace(x.data)
    assert t.is_hermitian(atol=0)


@settings(max_examples=25, deadline=None)
@given(subsets)
def test_duality_with_states(case):
    space, subset, seed = case
    x = random_op(space, seed)
    state = random_density(space, rng_stream(seed % 1000, 1))
    lhs, rhs = pt_duality_check(x, state, subset)
    assert abs(lhs - rhs) < 1e-12


def test_full_transpose():
    space = SPACES[1]
    x = random_op(space, 3)
    assert np.array_equal(partial_transpose(x, [1, 2, 3]).data, x.data.T)


def test_elementwise_definition():
    space = CompositeSpace((ModeSpec.boson(1), ModeSpec.boson(2)))
    x = random_op(space, 5)
    t = partial_transpose(x, [2]).data
    i = space.index_of((1, 0))
    j = space.index_of((0, 2))
    # <i_1 i_2| X^{T_2} |j_1 j_2> = <i_1 j_2| X |j_1 i_2>
    assert t[i, j] == x.data[space.index_of((1, 2)), space.index_of((0, 0))]


def test_non_contiguous_subset_and_int():
    space = CompositeSpace.bosons(3, 1)
    x = random_op(space, 9)
    a = partial_transpose(x, [1, 3])
    b = partial_transpose(partial_transpose(x, 1), 3)
    assert np.array_equal(a.data, b.data)


def test_empty_subset_warns():
    x = random_op(SPACES[0], 1)
    with pytest.warns(UserWarning):
        assert partial_transpose(x, []) is x


def test_bad_mode_index():
    with pytest.raises(ValueError):
        partial_transpose(random_op(SPACES[0], 1), [3])


def test_transpose_modes_on_plain_arrays():
    m = np.arange(16.0).reshape(4, 4)
    np.testing.assert_array_equal(transpose_modes(m, (2, 2), (1, 2)), m.T)


def test_diagonal_invariant():
    space = CompositeSpace.bosons(2, 3)
    n = ops.embed(ops.number_op(space.modes[0]), 1, space)
    assert np.array_equal(partial_transpose(n, [1]).data, n.data)


@pytest.mark.parametrize("kind,params", [
    ("boson3", {}),
    ("boson_n", {}),
    ("boson_n", {"n": 3, "cutoff": 5}),
    ("su2", {"two_j": 1}),
    ("su2", {"two_j": 2}),
    ("su2", {"two_j": 3}),
    ("su2", {"two_j": 4}),
    ("su11", {"two_k": 1}),
    ("su11", {"two_k": 2}),
])
def test_identity_and_commutator_suites(kind, params):
    ident = verify_pt_identities(kind, **params)
    comm = commutator_suite(kind, **params)
    assert ident.passed(1e-10), ident.deviations
    assert comm.passed(1e-10), comm.deviations
    assert len(ident.deviations) >= 7


def test_suite_reports_are_serialisable():
    rep = verify_pt_identities("boson3", cutoff=5)
    js = rep.to_json()
    assert js["params"]["cutoff"] == 5
    assert "corr = N_a + N_b + 1" in js["deviations"]


def test_suite_rejects_unknown_input():
    with pytest.raises(ValueError):
        verify_pt_identities("su3")
    with pytest.raises(ValueError):
        verify_pt_identities("su2", cutoff=3)
    with pytest.raises(ValueError):
        commutator_suite("boson3", two_j=1)


def test_identity_fails_without_projector():
    # the squared-member identity needs the safe projector on truncated spaces
    space = CompositeSpace.bosons(3, 3)
    hx = ops.build_boson_H(space).x
    lx = ops.build_boson_L(space).x
    corr = ops.build_aux_boson(space).correction
    dev = (partial_transpose(hx @ hx, [3]) - (lx @ lx + 0.25 * corr)).max_abs()
    assert dev > 1e-3
