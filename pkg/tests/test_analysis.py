import math
from fractions import Fraction

import pytest

import ghzforge as gf
from ghzforge import analysis
from ghzforge.errors import InvalidParameters, OracleTooLarge


class TestGhzReference:
    def test_three_photon_qubit(self):
        s = gf.ghz_reference(2, 3)
        assert len(s.terms) == 2
        assert s.amplitude(gf.ket((0, "H"), (2, "H"), (4, "H"))) == pytest.approx(
            1 / math.sqrt(2)
        )

    def test_four_photon_qutrit_target(self):
        s = gf.ghz_reference(3, 4)
        assert len(s.terms) == 3
        assert s.amplitude(
            gf.ket((2, "H"), (5, "H"), (8, "H"), (11, "H"))
        ) == pytest.approx(1 / math.sqrt(3))

    def test_two_photon_case_is_pair_source(self):
        ref = gf.ghz_reference(4, 2)
        src = gf.build_epr_source(4, None, [0, 1, 2, 3], [4, 5, 6, 7])
        assert gf.fidelity(src, ref) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_params(self):
        with pytest.raises(InvalidParameters):
            gf.ghz_reference(1, 4)


class TestFidelity:
    def test_self_fidelity(self):
        assert gf.fidelity(gf.ghz_reference(3, 4), gf.ghz_reference(3, 4)) == pytest.approx(1.0)

    def test_sign_twisted_overlap_one_ninth(self):
        kets = []
        for i, sign in ((0, 1.0), (1, 1.0), (2, -1.0)):
            kets.append(
                (
                    gf.ket((i, "H"), (3 + i, "H"), (6 + i, "H"), (9 + i, "H")),
                    sign / math.sqrt(3),
                )
            )
        twisted = gf.make_state(kets)
        assert gf.fidelity(twisted, gf.ghz_reference(3, 4)) == pytest.approx(1 / 9, abs=1e-12)

    def test_single_branch_overlap(self):
        branch = gf.make_state(
            [(gf.ket((0, "H"), (3, "H"), (6, "H"), (9, "H")), 1.0)]
        )
        assert gf.fidelity(branch, gf.ghz_reference(3, 4)) == pytest.approx(1 / 3, abs=1e-12)

    def test_empty_state_fidelity_zero(self):
        from ghzforge.states import PhotonicState

        assert gf.fidelity(PhotonicState({}, 0.0), gf.ghz_reference(2, 2)) == 0.0


class TestResourceFormulas:
    @pytest.mark.parametrize(
        "d,n,expected",
        [(3, 4, 1), (2, 4, 0), (2, 8, 0), (5, 8, 12), (5, 6, 8), (4, 6, 4)],
    )
    def test_aux_count(self, d, n, expected):
        assert gf.aux_count(d, n) == expected

    def test_pair_list_matches_count(self):
        # cross-check against direct same-parity pair counting
        for d in range(2, 12):
            pairs = gf.aux_pairs(d)
            even = (d + 1) // 2
            odd = d // 2
            assert len(pairs) == even * (even - 1) // 2 + odd * (odd - 1) // 2
            assert all(i < j and i % 2 == j % 2 for i, j in pairs)

    def test_eta1_walkthrough_value(self):
        assert analysis.eta1_exact(3) == Fraction(5, 9)
        assert gf.eta1(2) == pytest.approx(0.5)

    def test_eta2_walkthrough_value(self):
        assert analysis.eta2_exact(3, 1) == Fraction(3, 10)

    def test_eta2_out_of_range(self):
        with pytest.raises(InvalidParameters):
            gf.eta2(3, 2)

    @pytest.mark.parametrize(
        "d,n,ff,expected",
        [
            (3, 4, True, Fraction(1, 6)),
            (3, 4, False, Fraction(1, 12)),
            (2, 8, True, Fraction(1, 8)),
            (4, 6, True, Fraction(1, 256)),
            (3, 6, True, Fraction(1, 36)),
            (2, 4, False, Fraction(1, 2)),
        ],
    )
    def test_predicted_prob(self, d, n, ff, expected):
        assert analysis.predicted_prob_exact(d, n, ff) == expected

    def test_identity_suite_exact_up_to_128(self):
        for d in range(2, 129):
            n4 = gf.aux_count(d, 4)
            assert -((d * (d - 2)) // -4) == len(gf.aux_pairs(d))
            e1 = analysis.eta1_exact(d)
            assert e1 - Fraction(2 * n4, d * d) == Fraction(1, d)
            assert analysis.eta_product_exact(d) == Fraction(1, 2**n4 * d)

    def test_eta_product_matches_stagewise_fractions(self):
        # the fast integer-quotient form agrees with per-stage multiplication
        for d in range(2, 25):
            product = analysis.eta1_exact(d)
            for k in range(1, gf.aux_count(d, 4) + 1):
                product *= analysis.eta2_exact(d, k)
            assert analysis.eta_product_exact(d) == product


class TestClassification:
    @pytest.mark.parametrize(
        "d,diagonal,cross,same",
        [(2, 2, 2, 0), (3, 3, 4, 2), (5, 5, 12, 8)],
    )
    def test_partition_counts(self, d, diagonal, cross, same):
        table = gf.classify_terms(d)
        assert table.diagonal_count == diagonal
        assert table.cross_parity_count == cross
        assert table.same_parity_count == same
        assert diagonal + cross + same == d * d

    def test_matches_exhaustive_enumeration(self):
        # brute force over all ordered pairs, without the closed forms
        for d in range(2, 9):
            table = gf.classify_terms(d)
            for i in range(d):
                for j in range(d):
                    if i == j:
                        expected = analysis.DIAGONAL
                    elif (i % 2) != (j % 2):
                        expected = analysis.CROSS_PARITY
                    else:
                        expected = analysis.SAME_PARITY
                    assert table.by_pair[(i, j)] == expected
            assert table.same_parity_count == 2 * gf.aux_count(d, 4)

    def test_qutrit_same_parity_pairs_are_the_two_expected(self):
        table = gf.classify_terms(3)
        same = sorted(p for p, c in table.by_pair.items() if c == analysis.SAME_PARITY)
        assert same == [(0, 2), (2, 0)]


class TestOracle:
    def test_qutrit_chain(self):
        rep = gf.oracle_run(3, 4, feedforward=True)
        assert rep.prob == pytest.approx(1 / 6, abs=1e-12)
        assert rep.prob_filtered == pytest.approx(1 / 12, abs=1e-12)
        assert rep.fidelity == pytest.approx(1.0, abs=1e-12)

    def test_qubit_chain(self):
        rep = gf.oracle_run(2, 4, feedforward=True)
        assert rep.prob == pytest.approx(0.5, abs=1e-12)
        assert gf.fidelity(rep.final_state, gf.ghz_reference(2, 4)) == pytest.approx(1.0)

    def test_six_photon_qutrit(self):
        rep = gf.oracle_run(3, 6, feedforward=True)
        assert rep.prob == pytest.approx(1 / 36, abs=1e-12)
        assert rep.fidelity == pytest.approx(1.0, abs=1e-9)

    def test_size_bound(self):
        with pytest.raises(OracleTooLarge):
            gf.oracle_run(5, 4)
        with pytest.raises(OracleTooLarge):
            gf.oracle_run(3, 8)

    def test_trace_product_is_total(self):
        rep = gf.oracle_run(3, 5, feedforward=False)
        product = 1.0
        for p in rep.trace:
            product *= p
        assert product == pytest.approx(rep.prob, abs=1e-12)


class TestResourceSummary:
    def test_csv_row_shape(self):
        summary = gf.resource_summary(3, 4)
        row = analysis.resource_csv_row(summary)
        fields = row.split(",")
        assert fields[:4] == ["3", "4", "2", "1"]
        assert float(fields[4]) == pytest.approx(5 / 9)
        assert analysis.RESOURCE_CSV_HEADER.count(",") == row.count(",")
