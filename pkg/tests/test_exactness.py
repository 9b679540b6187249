import ast
import sys
from fractions import Fraction
from pathlib import Path

from audit import SRC, float_findings, source_files, unused_imports
from pbcalc.approx import approximate
from pbcalc.grammar import parse_pb
from pbcalc.radical import RadicalValue
from pbcalc.workbench import grid_structure

ROOT = Path(__file__).resolve().parent.parent


def test_no_approximate_numerics_in_package():
    findings = [f for path in source_files() for f in float_findings(path)]
    assert findings == []


def test_no_unused_imports():
    files = source_files() + sorted(Path(__file__).parent.glob("*.py"))
    assert [u for f in files for u in unused_imports(f)] == []


def _third_party_imports():
    stdlib = set(sys.stdlib_module_names)
    out = set()
    for path in source_files():
        for node in ast.walk(ast.parse(path.read_text())):
            if isinstance(node, ast.Import):
                names = [a.name for a in node.names]
            elif isinstance(node, ast.ImportFrom) and node.level == 0:
                names = [node.module]
            else:
                continue
            out |= {n.split(".")[0] for n in names} - stdlib - {"pbcalc"}
    return out


def test_runtime_dependencies_are_exactly_the_imports():
    text = (ROOT / "pyproject.toml").read_text()
    assert "dependencies = []" in text
    assert _third_party_imports() == set()


def test_values_stay_rational_or_radical():
    E = grid_structure(2, 2, Fraction(1, 2), 1)
    assert all(isinstance(c, Fraction) for v in E.carrier for c in v)
    assert all(isinstance(E.norm(v), RadicalValue | Fraction) for v in E.carrier)
    phi = approximate(parse_pb("(exists (y 1/3) (le (norm y) 2/7))"), 3)
    assert isinstance(phi.bound, Fraction) and isinstance(phi.body.bound, Fraction)


def test_package_has_no_float_in_data():
    for path in (SRC / "data").rglob("*"):
        if path.is_file():
            assert "." not in path.read_text().replace(".struct", "").replace(".pb", ""), path
