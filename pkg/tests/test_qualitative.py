import unittest

import numpy as np
import pytest

from somkit.dataset import QualitativeColumn
from somkit.datasets import MONUMENT_OWNERS, monuments_table
from somkit.errors import DegenerateDataError, ValidationError
from somkit.init import init_random_box
from somkit.metrics import deviations_for_labels
from somkit.qualitative import (
    BurtTable,
    ContingencyTable,
    build_tables,
    chi2_correct_burt,
    chi2_correct_disjunctive,
    col_profiles,
    kacm1_modality_vectors,
    kacm1_train,
    kacm2_classify_individuals,
    kacm_train,
    kdisj_default_iterations,
    kdisj_train,
    korresp_rows,
    korresp_train,
    partial_winner,
    rarest_modality,
    row_profiles,
)
from somkit.quantize import CodeBook, GainSchedule
from somkit.rng import Stream
from somkit.topology import MapTopology, RadiusSchedule, lattice_distance


def _toy_tables():
    a = QualitativeColumn.from_values("A", ["A1", "A2"])
    b = QualitativeColumn.from_values("B", ["B1", "B2"])
    return build_tables([a, b])


def _paired_tables(repeats=6):
    # A1 always with B1, A2 always with B2
    a = QualitativeColumn.from_values("A", ["A1", "A2"] * repeats)
    b = QualitativeColumn.from_values("B", ["B1", "B2"] * repeats)
    return build_tables([a, b])


class TableTests(unittest.TestCase):
    def test_toy_burt_table(self) -> None:
        B = _toy_tables().burt
        self.assertEqual(
            B.counts.tolist(),
            [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]],
        )
        self.assertEqual(B.modality_labels, ("A1", "A2", "B1", "B2"))

    def test_burt_is_d_transpose_d(self) -> None:
        rng = np.random.default_rng(0)
        quals = [
            QualitativeColumn.from_values(f"q{k}", [f"v{k}{x}" for x in rng.integers(0, 3, size=40)])
            for k in range(3)
        ]
        tables = build_tables(quals)
        D = tables.disjunctive.entries
        np.testing.assert_array_equal(tables.burt.counts, D.T @ D)
        self.assertTrue((tables.disjunctive.row_sums == 3).all())
        self.assertIsNone(tables.contingency)

    def test_unused_modality_is_rejected(self) -> None:
        a = QualitativeColumn("A", ("x", "y"), np.array([1]))
        b = QualitativeColumn("B", ("u", "v"), np.array([0]))
        with self.assertRaises(DegenerateDataError):
            build_tables([a, b])

    def test_rows_with_missing_answers_are_left_out(self) -> None:
        a = QualitativeColumn.from_values("A", ["x", "y", None, "x"])
        b = QualitativeColumn.from_values("B", ["u", "v", "u", "v"])
        tables = build_tables([a, b], row_labels=["r0", "r1", "r2", "r3"])
        self.assertEqual(tables.kept_rows.tolist(), [0, 1, 3])
        self.assertEqual(tables.disjunctive.row_labels, ("r0", "r1", "r3"))

    def test_repeated_level_names_are_qualified(self) -> None:
        a = QualitativeColumn.from_values("A", ["yes", "no"])
        b = QualitativeColumn.from_values("B", ["yes", "no"])
        labels = build_tables([a, b]).disjunctive.modality_labels
        self.assertEqual(labels, ("A:yes", "A:no", "B:yes", "B:no"))

    def test_two_variables_also_give_a_contingency_table(self) -> None:
        T = _paired_tables().contingency
        self.assertEqual(T.counts.tolist(), [[6, 0], [0, 6]])

    def test_asymmetric_burt_is_rejected(self) -> None:
        with self.assertRaises(ValidationError):
            BurtTable([[1, 0], [1, 1]], (2,), ("a", "b"))


class CorrectionTests(unittest.TestCase):
    def test_burt_correction_on_toy_table(self) -> None:
        corrected = chi2_correct_burt(_toy_tables().burt).values
        self.assertAlmostEqual(corrected[0, 2], 0.5)
        self.assertAlmostEqual(corrected[0, 0], 0.5)
        np.testing.assert_array_equal(corrected, corrected.T)

    def test_disjunctive_correction(self) -> None:
        corrected = chi2_correct_disjunctive(_toy_tables().disjunctive).values
        self.assertAlmostEqual(corrected[0, 0], 1 / np.sqrt(2))

    def test_disjunctive_entry_shrinks_with_modality_count(self) -> None:
        a = QualitativeColumn("A", ("x", "y"), np.array([0, 0, 0, 1]))
        b = QualitativeColumn.from_values("B", ["u", "v", "u", "v"])
        corrected = chi2_correct_disjunctive(build_tables([a, b]).disjunctive).values
        self.assertAlmostEqual(corrected[0, 0], 1 / np.sqrt(2 * 3))
        self.assertAlmostEqual(corrected[3, 1], 1 / np.sqrt(2 * 1))

    def test_profiles_sum_to_one(self) -> None:
        T = monuments_table()
        np.testing.assert_allclose(row_profiles(T).values.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(col_profiles(T).values.sum(axis=0), 1.0, atol=1e-12)

    def test_zero_margin_is_rejected(self) -> None:
        with self.assertRaises(DegenerateDataError):
            ContingencyTable([[1, 0], [2, 0]], ("a", "b"), ("c", "d"))


class MonumentTests(unittest.TestCase):
    def setUp(self) -> None:
        self.table = monuments_table()
        self.etat = MONUMENT_OWNERS.index("ETAT")

    def test_shape_and_state_total(self) -> None:
        self.assertEqual(self.table.shape, (11, 6))
        self.assertEqual(int(self.table.col_sums[self.etat]), 709)

    def test_state_profile_of_cathedrals(self) -> None:
        c = col_profiles(self.table).values
        cathedral = self.table.row_labels.index("cathédrale")
        self.assertAlmostEqual(c[cathedral, self.etat], 87 / 709)

    def test_augmented_rows(self) -> None:
        aug = korresp_rows(self.table)
        p, q = self.table.shape
        self.assertEqual(aug.rows.shape, (p + q, q + p))
        cathedral = self.table.row_labels.index("cathédrale")
        self.assertEqual(int(aug.best_col[cathedral]), self.etat)
        np.testing.assert_allclose(aug.rows[cathedral, q:], col_profiles(self.table).values[:, self.etat])
        self.assertEqual(int(aug.best_row[self.etat]), self.table.row_labels.index("préhistorique"))


def test_partial_winner_ignores_other_components():
    codes = np.array([[0.0, 0.0, 9.0], [1.0, 1.0, -9.0]])
    x = np.array([0.9, 0.9, 9.0])
    assert partial_winner(codes, x, slice(0, 2)) == 1
    shuffled = codes.copy()
    shuffled[:, 2] = shuffled[::-1, 2]
    assert partial_winner(shuffled, x, slice(0, 2)) == 1


def test_rarest_modality_wins_for_kdisj():
    # individual 0 picks x (chosen 5 times) and v (chosen 2 times)
    a = QualitativeColumn.from_values("A", ["x"] * 5 + ["y"] * 2)
    b = QualitativeColumn.from_values("B", ["v", "u", "u", "u", "u", "v", "u"])
    D = build_tables([a, b]).disjunctive
    assert D.modality_labels[int(rarest_modality(D)[0])] == "v"


class KorrespTests(unittest.TestCase):
    def test_deterministic_for_a_seed(self) -> None:
        T = monuments_table()
        topo = MapTopology("grid", 3, 3)
        gain = GainSchedule("harmonic", 0.5, 0.01, 300)
        radii = RadiusSchedule.linear_decay(1, 300)
        a = korresp_train(T, topo, gain, radii, seed=3)
        b = korresp_train(T, topo, gain, radii, seed=3)
        self.assertEqual(a.codebook.codes.tobytes(), b.codebook.codes.tobytes())
        self.assertEqual(a.modality_units, b.modality_units)
        self.assertEqual(len(a.modality_units), 17)

    def test_needs_a_two_by_two_table(self) -> None:
        T = ContingencyTable([[1, 2, 3]], ("a",), ("x", "y", "z"))
        gain = GainSchedule("constant", 0.1, total_iterations=4)
        with self.assertRaises(ValidationError):
            korresp_train(T, MapTopology("grid", 2, 2), gain, RadiusSchedule.constant(0), seed=0)

    def test_colliding_labels_are_prefixed(self) -> None:
        T = ContingencyTable([[3, 1], [1, 3]], ("a", "b"), ("a", "c"))
        gain = GainSchedule("constant", 0.1, total_iterations=4)
        placed = korresp_train(T, MapTopology("grid", 2, 2), gain, RadiusSchedule.constant(0), seed=0)
        self.assertEqual(sorted(placed.modality_units), ["col:a", "col:c", "row:a", "row:b"])


def test_korresp_places_categories_next_to_their_owners():
    T = monuments_table()
    topo = MapTopology("grid", 5, 5)
    steps = 3000
    gain = GainSchedule("harmonic", 0.5, 0.01, steps)
    radii = RadiusSchedule.linear_decay(2, steps)
    pairs = [("cathédrale", "ETAT"), ("église", "COMM"), ("chateau", "PRIV")]
    close = dict.fromkeys(pairs, 0)
    for seed in range(20):
        units = korresp_train(T, topo, gain, radii, seed).modality_units
        for category, owner in pairs:
            close[category, owner] += lattice_distance(topo, units[category], units[owner]) <= 1
    for pair, count in close.items():
        assert count >= 16, pair


class KacmTests(unittest.TestCase):
    def test_single_zero_gain_step_places_by_initial_codes(self) -> None:
        B = _toy_tables().burt
        topo = MapTopology("grid", 2, 2)
        gain = GainSchedule("constant", 0.0, total_iterations=1)
        placed = kacm_train(B, topo, gain, RadiusSchedule.constant(0), seed=4, iterations=1)
        self.assertEqual(placed.modality_units["A1"], placed.modality_units["B1"])
        self.assertEqual(placed.modality_units["A2"], placed.modality_units["B2"])

    def test_initial_codes_and_training_use_separate_streams(self) -> None:
        B = _paired_tables().burt
        topo = MapTopology("grid", 2, 2)
        gain = GainSchedule("constant", 0.0, total_iterations=1)
        placed = kacm_train(B, topo, gain, RadiusSchedule.constant(0), seed=4, iterations=1)
        data = chi2_correct_burt(B).as_data()
        init_seed, train_seed = Stream(4).spawn_seeds(2)
        expected = init_random_box(data, topo, init_seed).codes
        np.testing.assert_array_equal(placed.codebook.codes, expected)
        self.assertNotEqual(init_seed, train_seed)
        self.assertFalse(np.array_equal(expected, init_random_box(data, topo, 4).codes))

    def test_kacm2_scales_individual_rows(self) -> None:
        tables = _toy_tables()
        codes = CodeBook(MapTopology.string(2), [[0.0, 0.5, 0.0, 0.5], [0.5, 0.0, 0.5, 0.0]])
        units = kacm2_classify_individuals(codes, tables.disjunctive)
        self.assertEqual(units.tolist(), [1, 0])

    def test_kacm2_rejects_wrong_dimension(self) -> None:
        codes = CodeBook(MapTopology.string(2), [[0.0, 0.0], [1.0, 1.0]])
        with self.assertRaises(ValidationError):
            kacm2_classify_individuals(codes, _toy_tables().disjunctive)

    def test_kacm1_modality_vector(self) -> None:
        tables = _toy_tables()
        vectors = kacm1_modality_vectors(tables.disjunctive, tables.burt)
        self.assertAlmostEqual(vectors[0, 0], 1 / np.sqrt(2))

    def test_kacm1_is_deterministic(self) -> None:
        tables = _paired_tables()
        topo = MapTopology("grid", 2, 2)
        gain = GainSchedule("harmonic", 0.5, 0.01, 100)
        radii = RadiusSchedule.linear_decay(1, 100)
        a = kacm1_train(tables.disjunctive, tables.burt, topo, gain, radii, seed=2)
        b = kacm1_train(tables.disjunctive, tables.burt, topo, gain, radii, seed=2)
        self.assertEqual(a.modality_units, b.modality_units)
        self.assertEqual(a.individual_units.tolist(), b.individual_units.tolist())


def test_kacm_separates_associated_pairs():
    B = _toy_tables().burt
    topo = MapTopology("grid", 3, 3)
    steps = 400
    gain = GainSchedule("harmonic", 0.5, 0.01, steps)
    radii = RadiusSchedule.from_pairs([(0, 1), (300, 0)])
    good = 0
    for seed in range(20):
        units = kacm_train(B, topo, gain, radii, seed).modality_units
        together = lattice_distance(topo, units["A1"], units["B1"]) <= 1 and \
            lattice_distance(topo, units["A2"], units["B2"]) <= 1
        apart = lattice_distance(topo, units["A1"], units["A2"]) > 1
        good += together and apart
    assert good >= 16


class KdisjTests(unittest.TestCase):
    def setUp(self) -> None:
        self.D = _paired_tables().disjunctive
        self.topo = MapTopology("grid", 3, 3)

    def test_default_budget(self) -> None:
        self.assertEqual(kdisj_default_iterations(self.D), 15 * (4 + 12))

    def test_modality_steps_leave_first_block_untouched(self) -> None:
        steps = 60
        gain = GainSchedule("harmonic", 0.5, 0.01, steps)
        snapshots = []
        kdisj_train(self.D, self.topo, gain, RadiusSchedule.constant(1), seed=1,
                    on_step=lambda t, codes: snapshots.append(codes))
        M = self.D.n_modalities
        for t in range(1, steps, 2):
            np.testing.assert_array_equal(snapshots[t][:, :M], snapshots[t - 1][:, :M])

    def test_identical_columns_share_a_unit(self) -> None:
        gain = GainSchedule("harmonic", 0.5, 0.01, kdisj_default_iterations(self.D))
        placed = kdisj_train(self.D, self.topo, gain, RadiusSchedule.constant(0), seed=5)
        units = placed.modality_units
        self.assertEqual(units["A1"], units["B1"])
        self.assertEqual(units["A2"], units["B2"])
        self.assertEqual(placed.individual_units.shape, (12,))
        self.assertEqual(placed.codebook.dim, 4 + 12)


def _majority(units: np.ndarray) -> int:
    return int(np.bincount(units).argmax())


@pytest.mark.parametrize("kind", ["grid", "torus"])
def test_kdisj_puts_modalities_where_their_individuals_are(kind):
    groups = [k for k in range(3) for _ in range(20)]
    a = QualitativeColumn.from_values("A", [f"a{k}" for k in groups])
    b = QualitativeColumn.from_values("B", [f"b{k}" for k in groups])
    D = build_tables([a, b]).disjunctive
    topo = MapTopology(kind, 3, 3)
    steps = kdisj_default_iterations(D)
    gain = GainSchedule("harmonic", 0.5, 0.01, steps)
    radii = RadiusSchedule.from_pairs([(0, 1), (steps // 2, 0)])
    good = 0
    for seed in range(20):
        placed = kdisj_train(D, topo, gain, radii, seed)
        individuals = placed.individual_units
        ok = True
        for qual in (a, b):
            table = deviations_for_labels(individuals, topo.unit_count, qual)
            for m, name in enumerate(qual.level_names):
                unit = placed.modality_units[name]
                home = _majority(individuals[qual.codes == m])
                ok &= lattice_distance(topo, unit, home) <= 1
                ok &= table[m, unit] >= -1e-9
        good += ok
    assert good >= 16


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
