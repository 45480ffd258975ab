import json
import unittest

import numpy as np
import pytest

from somkit.dataset import DataMatrix, standardize
from somkit.errors import ValidationError
from somkit.persist import (
    CODEBOOK_FILE,
    StoredCodebook,
    assigned_units,
    build_assignment_csv,
    build_codebook_json,
    build_modalities_csv,
    build_superclass_json,
    load_codebook,
    load_superclasses,
    parse_codebook_json,
    read_assignment,
    read_modalities,
    write_run_dir,
    write_svg,
)
from somkit.quantize import CodeBook
from somkit.superclass import SuperClassing, contiguity_report, hierarchical_superclasses
from somkit.topology import MapTopology


class TestCodebookDocument(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(0)
        data = DataMatrix.from_array(rng.normal(size=(10, 3)), col_labels=["a", "b", "c"])
        _, self.transform = standardize(data, "zscore")
        self.stored = StoredCodebook(
            CodeBook(MapTopology("torus", 2, 3), rng.normal(size=(6, 3)) / 3.0),
            ["a", "b", "c"],
            self.transform,
            {"algorithm": "som", "seed": 7},
        )

    def test_document_contains_expected_sections(self):
        document = json.loads(build_codebook_json(self.stored))
        self.assertEqual(document["schema"], "somkit.codebook")
        self.assertEqual(document["version"], 1)
        self.assertEqual(document["topology"], "torus:2x3")
        self.assertEqual(document["columns"], ["a", "b", "c"])
        self.assertEqual(document["standardization"]["mode"], "zscore")
        self.assertEqual(document["metadata"], {"algorithm": "som", "seed": 7})

    def test_codes_read_back_bit_exactly(self):
        again = parse_codebook_json(build_codebook_json(self.stored))
        self.assertEqual(again.codebook.codes.tobytes(), self.stored.codebook.codes.tobytes())
        self.assertEqual(again.codebook.topo, self.stored.codebook.topo)
        self.assertEqual(again.standardization.stds.tobytes(), self.transform.stds.tobytes())

    def test_output_is_stable(self):
        self.assertEqual(build_codebook_json(self.stored), build_codebook_json(self.stored))
        self.assertTrue(build_codebook_json(self.stored).endswith("}\n"))

    def test_rejects_foreign_documents(self):
        with self.assertRaises(ValidationError):
            parse_codebook_json('{"schema": "other"}')
        with self.assertRaises(ValidationError):
            parse_codebook_json("not json")


class TestAssignmentCsv(unittest.TestCase):
    def test_plain_rows(self):
        text = build_assignment_csv(["r1", "r2"], [3, 0], super_of=[0, 0, 1, 1])
        self.assertEqual(text, "id,unit,superclass\nr1,3,1\nr2,0,0\n")

    def test_failed_rows_keep_their_line(self):
        text = build_assignment_csv(["r1", "r2"], [1, None], errors={1: "row has no present component"})
        lines = text.splitlines()
        self.assertEqual(lines[0], "id,unit,superclass,error")
        self.assertEqual(lines[2], "r2,,,row has no present component")

    def test_trained_flag_column(self):
        text = build_assignment_csv(["a", "b"], [0, 1], trained=[True, False])
        self.assertEqual(text.splitlines()[0], "id,unit,superclass,trained")
        self.assertTrue(text.endswith("b,1,,0\n"))


def test_run_dir_round_trip(tmp_path):
    stored = StoredCodebook(CodeBook(MapTopology.string(2), [[0.0], [1.0]]), ["x"],
                            standardize(DataMatrix.from_array([[0.0], [1.0]]))[1])
    sc = hierarchical_superclasses(stored.codebook, 2)
    out = write_run_dir(tmp_path / "run", {
        CODEBOOK_FILE: build_codebook_json(stored),
        "assignment.csv": build_assignment_csv(["NA", "b"], [0, None], errors={1: "bad"}),
        "superclasses.json": build_superclass_json(sc, contiguity_report(sc, stored.codebook.topo)),
        "modalities.csv": build_modalities_csv({"A1": 1, "B1": 0}, sc.super_of),
    })
    assert sorted(p.name for p in out.iterdir()) == [
        "assignment.csv", "codebook.json", "modalities.csv", "superclasses.json",
    ]
    assert load_codebook(out).codebook.codes.tolist() == [[0.0], [1.0]]
    frame = read_assignment(out)
    assert frame["id"].tolist() == ["NA", "b"]
    assert assigned_units(frame).tolist() == [0, -1]
    assert load_superclasses(out).super_of.tolist() == sc.super_of.tolist()
    assert read_modalities(out / "modalities.csv") == {"A1": 1, "B1": 0}


def test_existing_run_dir_is_never_overwritten(tmp_path):
    (tmp_path / "run").mkdir()
    with pytest.raises(ValidationError):
        write_run_dir(tmp_path / "run", {"a.txt": "x"})


def test_failed_write_leaves_nothing_behind(tmp_path):
    with pytest.raises(OSError):
        write_run_dir(tmp_path / "run", {"ok.txt": "x", "missing/dir.txt": "y"})
    assert list(tmp_path.iterdir()) == []


def test_missing_superclass_file_gives_none(tmp_path):
    assert load_superclasses(tmp_path) is None


def test_superclass_document_keeps_merges():
    sc = SuperClassing(np.array([0, 1, 1]), 2, ((1, 2, 0.5), (0, 3, 2.0)), (True, True))
    document = json.loads(build_superclass_json(sc, [1, 1]))
    assert document["merges"] == [[1, 2, "0.5"], [0, 3, "2.0"]]
    assert document["sizes"] == [1, 2]


def test_write_svg_forces_extension(tmp_path):
    path = write_svg(tmp_path / "map.png", "<svg/>")
    assert path.name == "map.svg"
    assert path.read_text(encoding="utf-8") == "<svg/>"


if __name__ == "__main__":
    unittest.main()
