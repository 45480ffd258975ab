import unittest

import pytest

from somkit.config import (
    RunConfig,
    canonical_algorithm,
    default_kbatch_schedule,
    default_start_radius,
    parse_count,
    parse_radius_schedule,
    parse_topology,
)
from somkit.errors import MissingDataError, ScheduleError, ValidationError
from somkit.topology import MapTopology


def test_counts_accept_multiples_of_n():
    assert parse_count("200", 50) == 200
    assert parse_count("6N", 50) == 300
    assert parse_count("1.5n", 10) == 15
    with pytest.raises(ValidationError):
        parse_count("lots", 10)


def test_radius_schedule_text():
    radii = parse_radius_schedule("2@0,1@2N,0@4N", 100)
    assert radii.steps == ((0, 2), (200, 1), (400, 0))
    with pytest.raises(ScheduleError):
        parse_radius_schedule("2@0,3@10", 5)
    with pytest.raises(ScheduleError):
        parse_radius_schedule("2", 5)


def test_aliases_resolve_to_algorithms():
    assert canonical_algorithm("FASTCLUS") == "forgy"
    assert canonical_algorithm("kfast") == "scl"
    assert canonical_algorithm("kacp") == "som"
    with pytest.raises(ValidationError):
        canonical_algorithm("kmeans++")


def test_topology_parsing():
    assert parse_topology("hex", 3, 4) == MapTopology("hexgrid", 3, 4)
    assert parse_topology("string", 1, 7) == MapTopology.string(7)
    assert parse_topology("string", 7, 1) == MapTopology.string(7)


def test_default_schedules_end_at_zero():
    topo = MapTopology("grid", 10, 10)
    assert default_start_radius(topo) == 4
    assert default_kbatch_schedule(topo).steps == ((0, 4), (5, 3), (10, 2), (15, 1), (20, 0))
    assert default_start_radius(MapTopology("grid", 2, 2)) == 1


class RunConfigTests(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = MapTopology("grid", 3, 3)

    def test_defaults(self) -> None:
        config = RunConfig("som", self.grid, seed=1)
        self.assertEqual(config.resolve_iterations(50), 300)
        self.assertEqual(config.gain_schedule(300).kind, "harmonic")
        self.assertEqual(config.resolve_radii(300, 50).final_radius, 0)

    def test_competitive_learning_has_no_neighbours(self) -> None:
        config = RunConfig("scl", self.grid, seed=1)
        self.assertEqual(config.resolve_radii(100, 10).steps, ((0, 0),))

    def test_kdisj_budget(self) -> None:
        config = RunConfig("kdisj", self.grid, seed=1)
        self.assertEqual(config.resolve_iterations(20), 300)

    def test_explicit_schedule_wins(self) -> None:
        config = RunConfig("som", self.grid, seed=1, radius_schedule="1@0,0@N")
        self.assertEqual(config.resolve_radii(60, 10).steps, ((0, 1), (10, 0)))

    def test_korresp_requires_two_variables(self) -> None:
        config = RunConfig("korresp", self.grid, seed=1)
        with self.assertRaises(ValidationError) as ctx:
            config.validate(n_qualitative=3)
        self.assertIn("exactly 2 qualitative variables", str(ctx.exception))
        config.validate(contingency=True)

    def test_batch_runs_refuse_missing_values(self) -> None:
        with self.assertRaises(MissingDataError):
            RunConfig("kbatch", self.grid, seed=1).validate(n_cols=2, has_missing=True)
        RunConfig("som", self.grid, seed=1).validate(n_cols=2, has_missing=True)

    def test_superclass_count_must_fit_the_map(self) -> None:
        with self.assertRaises(ValidationError):
            RunConfig("som", self.grid, seed=1, superclasses=10).validate(n_cols=2)

    def test_unknown_choices_are_rejected(self) -> None:
        with self.assertRaises(ValidationError):
            RunConfig("som", self.grid, seed=1, init="IV")
        with self.assertRaises(ValidationError):
            RunConfig("som", self.grid, seed=-1)
        with self.assertRaises(ValidationError):
            RunConfig("som", self.grid, seed=1, report_radius=-1)

    def test_dict_round_trip(self) -> None:
        config = RunConfig("kacp", MapTopology("torus", 4, 5), seed=9, iterations="8N", standardize="zscore",
                           report_radius=2)
        again = RunConfig.from_dict(config.to_dict())
        self.assertEqual(again, config)
        self.assertEqual(again.algorithm, "som")
        self.assertEqual(again.report_radius, 2)


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
