import tempfile
import unittest
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from somkit import helpers
from somkit.fills import build_fill
from somkit.persist import write_svg
from somkit.topology import MapTopology
from somkit.viz import RenderOptions, render_codebook

SVG = "{http://www.w3.org/2000/svg}"


class TestSuperclassShades(unittest.TestCase):
    def _cell_fills(self, palette) -> set:
        opts = RenderOptions(palette=palette)
        document = render_codebook(MapTopology.string(2), np.zeros((2, 2)), opts, superclasses=[0, 1])
        return {r.get("fill") for r in ET.fromstring(document).findall(f"{SVG}rect")}

    def test_solid_superclass_fill_is_a_lightened_palette_colour(self):
        fills = self._cell_fills(("#000000", "#ffffff"))
        # black moved 45% of the way to white
        self.assertIn("#737373", fills)
        self.assertIn("#ffffff", fills)

    def test_short_palette_colours_are_expanded(self):
        self.assertEqual(self._cell_fills(("#000", "#fff")), self._cell_fills(("#000000", "#ffffff")))

    def test_hatch_ink_is_the_base_darkened_by_half(self):
        defs, _ = build_fill("hatch", 0, "#808080")
        self.assertIn('fill="#404040"', defs)
        self.assertIn('fill="#808080"', defs)


class TestFileNames(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.root = Path(self._tmp.name)

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_view_without_extension_is_written_as_svg(self):
        path = write_svg(self.root / "octagons", "<svg/>")
        self.assertEqual(path.name, "octagons.svg")
        self.assertTrue(path.exists())

    def test_blank_name_has_no_extension(self):
        self.assertEqual(helpers.ensure_extension("  ", "svg"), "")

    def test_sanitize_strips_unsafe_characters(self):
        self.assertEqual(helpers.sanitize(" my data/set.csv "), "mydatasetcsv")
        self.assertEqual(helpers.sanitize("///"), "map")


class TestSvgText(unittest.TestCase):
    def test_fmt_has_no_negative_zero(self):
        self.assertEqual(helpers.fmt(-0.001), "0.00")
        self.assertEqual(helpers.fmt(1.5), "1.50")

    def test_escape_quotes(self):
        self.assertEqual(helpers.escape('a "b" <c>'), "a &quot;b&quot; &lt;c&gt;")

    def test_header_sets_view_box(self):
        self.assertIn('viewBox="0 0 10.00 20.00"', helpers.svg_header(10, 20))

    def test_outline_is_empty_without_stroke(self):
        self.assertEqual(helpers.outline(None, 1.0), "")


if __name__ == "__main__":
    unittest.main()
