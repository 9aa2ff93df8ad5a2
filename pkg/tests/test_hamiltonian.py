"""Tests for problem, initial and interpolating Hamiltonians."""
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiasearch.components.database import SearchTarget, random_database, random_target
from adiasearch.components.hamiltonian import (
    HamiltonianKind,
    InitialForm,
    SearchHamiltonian,
    apply,
    as_linear_operator,
    dense_matrix,
    initial_state,
    msas_hamiltonian,
    norm_bound,
    popcount,
    problem_hamiltonian,
    problem_hamiltonian_fullvalue,
    search_hamiltonian,
)
from adiasearch.components.operators import DiagonalOperator
from adiasearch.utils.errors import DomainError, RangeError


def random_vector(size, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


class TestProblemHamiltonian:
    """Diagonal problem Hamiltonians."""

    def test_example_bit_sum(self, example_db, example_target):
        """Summed bit Hamiltonian of the worked example, entry for entry."""
        h_p = problem_hamiltonian(example_db, example_target)
        assert h_p == DiagonalOperator([2, 2, 0, 2, 1, 1, 1, 3])
        assert repr(h_p) == "diag{2,2,0,2,1,1,1,3}"

    def test_example_full_value(self, example_db, example_target):
        """(D - t)^2 squares the value differences."""
        h_p = problem_hamiltonian_fullvalue(example_db, example_target)
        assert h_p.diag.tolist() == [1, 4, 0, 25, 1, 16, 4, 9]

    def test_entries_are_hamming_distances(self, small_db):
        """Entry i equals the Hamming distance between v_i and t."""
        target = SearchTarget(11, 4)
        h_p = problem_hamiltonian(small_db, target)
        expected = popcount(small_db.values_array() ^ 11, 4)
        assert np.array_equal(h_p.diag, expected.astype(float))

    def test_width_mismatch(self, example_db):
        """Target and database widths must agree."""
        with pytest.raises(RangeError):
            problem_hamiltonian(example_db, SearchTarget(1, 2))

    def test_final_spectrum_multiplicities(self):
        """At s=1 level k has degeneracy C(n, k) and no level exceeds n."""
        for trial in range(100):
            n = 3 + trial % 6
            db = random_database(n, seed=trial)
            target = random_target(n, seed=trial)
            diag = problem_hamiltonian(db, target).diag
            levels, counts = np.unique(diag, return_counts=True)
            assert levels.tolist() == list(range(n + 1))
            assert counts.tolist() == [comb(n, k) for k in range(n + 1)]

    def test_dense_final_spectrum(self, example_db, example_target):
        """Diagonalizing H(1) gives back the diagonal entries."""
        h = search_hamiltonian(example_db, example_target)
        eigenvalues = np.linalg.eigvalsh(dense_matrix(h, 1.0))
        assert np.allclose(eigenvalues, [0, 1, 1, 1, 2, 2, 2, 3])


class TestSearchHamiltonian:
    """Construction and invariant checks."""

    def test_bit_sum_defaults(self, example_db, example_target):
        """Default kind is the summed bit Hamiltonian with a transverse field."""
        h = search_hamiltonian(example_db, example_target)
        assert h.kind is HamiltonianKind.BIT_SUM
        assert h.initial_form is InitialForm.TRANSVERSE_FIELD
        assert h.g == 0.5

    def test_msas_from_database(self, example_db, example_target):
        """MSAS marks the index holding the target."""
        h = search_hamiltonian(example_db, example_target, HamiltonianKind.MSAS)
        assert h.marked_index == 2
        assert h.problem_diag.diag.tolist() == [1, 1, 0, 1, 1, 1, 1, 1]

    def test_msas_marked_range(self):
        """The marked index must lie in [0, 2^n)."""
        with pytest.raises(RangeError):
            msas_hamiltonian(3, 8)

    def test_invalid_bit_sum_diagonal(self):
        """Bit-sum entries above n violate the invariant."""
        h = SearchHamiltonian(DiagonalOperator([0, 1, 2, 5]))
        with pytest.raises(DomainError):
            h.check_invariants()

    def test_positive_coupling(self, example_db, example_target):
        """g must be positive."""
        with pytest.raises(RangeError):
            search_hamiltonian(example_db, example_target, g=0.0)

    def test_norm_bound(self, example_db, example_target):
        """||H_i|| + ||H_p|| is n*g + max entry."""
        h = search_hamiltonian(example_db, example_target)
        assert norm_bound(h) == pytest.approx(3 * 0.5 + 3)
        assert norm_bound(msas_hamiltonian(3, 1)) == pytest.approx(2.0)

    def test_shifted_keeps_everything_else(self, example_db, example_target):
        """shifted adds a multiple of the identity to H_p only."""
        h = search_hamiltonian(example_db, example_target)
        moved = h.shifted(1.0)
        assert moved.problem_diag.diag.min() == 1.0
        assert moved.g == h.g and moved.kind is h.kind


class TestApply:
    """Matrix-free application of H(s)."""

    @given(
        seed=st.integers(0, 10_000),
        n=st.integers(1, 6),
        s=st.floats(0.0, 1.0),
        form=st.sampled_from(list(InitialForm)),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_dense_matrix(self, seed, n, s, form):
        """apply agrees with the materialized matrix."""
        db = random_database(n, seed)
        h = search_hamiltonian(db, random_target(n, seed), initial_form=form, g=0.7)
        psi = random_vector(1 << n, seed)
        assert np.allclose(apply(h, s, psi), dense_matrix(h, s) @ psi, atol=1e-12)

    @given(seed=st.integers(0, 10_000), s=st.floats(0.0, 1.0))
    @settings(max_examples=40, deadline=None)
    def test_hermitian_and_linear(self, seed, s):
        """<phi|H psi> = <H phi|psi> and H(a psi + phi) = a H psi + H phi."""
        h = search_hamiltonian(random_database(4, seed), random_target(4, seed))
        psi, phi = random_vector(16, seed), random_vector(16, seed + 1)
        assert np.vdot(phi, apply(h, s, psi)) == pytest.approx(np.vdot(apply(h, s, phi), psi))
        a = 0.3 - 1.1j
        assert np.allclose(
            apply(h, s, a * psi + phi), a * apply(h, s, psi) + apply(h, s, phi)
        )

    def test_transverse_ground_state(self, example_db, example_target):
        """The signed uniform state has energy -n*g under H_i."""
        h = search_hamiltonian(example_db, example_target)
        psi0 = initial_state(3).amplitudes
        assert np.allclose(apply(h, 0.0, psi0), -1.5 * psi0)
        assert np.allclose(np.abs(psi0) ** 2, 1 / 8)

    def test_projector_annihilates_uniform_state(self):
        """I - |u><u| has the uniform state as its zero-energy ground state."""
        h = msas_hamiltonian(3, 2)
        u = initial_state(3, InitialForm.UNIFORM_PROJECTOR).amplitudes
        assert np.allclose(apply(h, 0.0, u), 0.0)
        e0 = np.zeros(8)
        e0[0] = 1.0
        assert np.allclose(apply(h, 0.0, e0), e0 - 1 / 8)

    def test_argument_checks(self, example_db, example_target):
        """Shape and s are validated."""
        h = search_hamiltonian(example_db, example_target)
        with pytest.raises(RangeError):
            apply(h, 0.5, np.ones(4))
        with pytest.raises(RangeError):
            apply(h, 1.5, np.ones(8))

    def test_linear_operator(self, example_db, example_target):
        """The LinearOperator wrapper reproduces apply."""
        h = search_hamiltonian(example_db, example_target)
        v = np.arange(8, dtype=float)
        assert np.allclose(as_linear_operator(h, 0.3) @ v, apply(h, 0.3, v))

    def test_dense_size_guard(self):
        """Dense matrices are refused above the dense limit."""
        with pytest.raises(RangeError):
            dense_matrix(msas_hamiltonian(11, 0), 0.5)


class TestPopcount:
    def test_popcount(self):
        assert popcount(np.arange(8), 3).tolist() == [0, 1, 1, 2, 1, 2, 2, 3]
