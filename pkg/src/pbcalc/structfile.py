"""Plain-text structure files.

    [space] dim=2 norm=lp:2 name=grid
    [carrier]
    0 0
    1/2 0
    ...
    [const c]
    1 0
    [fn T affine]          # d matrix rows, then the offset row
    [fn S table]           # lines "x -> y"; several arguments separated by "|"
    [rel f normpower] exponent=2
    [rel R table]          # lines "x | y -> q"
    [symbols] [bounds] [moduli] [grid]   optional signature tables

Blank lines and text after '#' are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .evaluator import Affine, FiniteNormedStructure, FnTable, NormPower, RelTable
from .syntax import INF

SIGNATURE_SECTIONS = ("symbols", "bounds", "moduli", "grid")


class StructureFileError(ValueError):
    pass


@dataclass
class Section:
    words: list
    attrs: dict
    lineno: int
    lines: list = field(default_factory=list)   # (lineno, text)


def _sections(text: str) -> list[Section]:
    out: list[Section] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            close = line.find("]")
            if close < 0:
                raise StructureFileError(f"line {lineno}: unterminated section header")
            attrs = {}
            for item in line[close + 1:].split():
                k, eq, v = item.partition("=")
                if not eq:
                    raise StructureFileError(f"line {lineno}: expected key=value, got {item!r}")
                attrs[k] = v
            out.append(Section(line[1:close].split(), attrs, lineno))
        elif not out:
            raise StructureFileError(f"line {lineno}: content before the first section")
        else:
            out[-1].lines.append((lineno, line))
    return out


def split_sections(text: str) -> dict:
    """Signature sections only, as name -> lines."""
    out: dict = {}
    for s in _sections(text):
        if s.words and s.words[0] in SIGNATURE_SECTIONS:
            out.setdefault(s.words[0], []).extend(s.lines)
    return out


def _vector(text: str, dim: int, lineno: int) -> tuple:
    try:
        v = tuple(Fraction(x) for x in text.split())
    except (ValueError, ZeroDivisionError):
        raise StructureFileError(f"line {lineno}: bad rational in {text!r}") from None
    if len(v) != dim:
        raise StructureFileError(f"line {lineno}: expected {dim} components, got {len(v)}")
    return v


def _table_line(text: str, lineno: int):
    lhs, arrow, rhs = text.partition("->")
    if not arrow:
        raise StructureFileError(f"line {lineno}: table line needs '->'")
    return [a.strip() for a in lhs.split("|")], rhs.strip()


def loads(text: str) -> FiniteNormedStructure:
    secs = _sections(text)
    space = next((s for s in secs if s.words == ["space"]), None)
    if space is None:
        raise StructureFileError("missing [space] section")
    try:
        dim = int(space.attrs["dim"])
        norm = space.attrs["norm"]
    except KeyError as e:
        raise StructureFileError(f"line {space.lineno}: [space] needs {e.args[0]}=") from None
    if norm == "linf":
        p = INF
    elif norm.startswith("lp:"):
        p = int(norm[3:])
    else:
        raise StructureFileError(f"line {space.lineno}: norm must be lp:<p> or linf")
    carrier, constants, functions, relations = [], {}, {}, {}
    for s in secs:
        kind = s.words[0]
        if kind in ("space",) + SIGNATURE_SECTIONS:
            continue
        if kind == "carrier":
            carrier += [_vector(t, dim, n) for n, t in s.lines]
        elif kind == "const":
            if len(s.words) != 2 or len(s.lines) != 1:
                raise StructureFileError(f"line {s.lineno}: [const NAME] takes one vector line")
            constants[s.words[1]] = _vector(s.lines[0][1], dim, s.lines[0][0])
        elif kind == "fn" and len(s.words) == 3:
            name, how = s.words[1], s.words[2]
            if how == "affine":
                if len(s.lines) != dim + 1:
                    raise StructureFileError(f"line {s.lineno}: affine map needs {dim + 1} lines")
                rows = [_vector(t, dim, n) for n, t in s.lines]
                functions[name] = Affine(tuple(rows[:dim]), rows[dim])
            elif how == "table":
                mapping, arity = {}, None
                for n, t in s.lines:
                    args, out = _table_line(t, n)
                    vs = tuple(_vector(a, dim, n) for a in args)
                    if arity is None:
                        arity = len(vs)
                    elif arity != len(vs):
                        raise StructureFileError(f"line {n}: inconsistent table arity")
                    mapping[vs[0] if arity == 1 else vs] = _vector(out, dim, n)
                functions[name] = FnTable(mapping, arity or 1)
            else:
                raise StructureFileError(f"line {s.lineno}: function kind must be affine or table")
        elif kind == "rel" and len(s.words) == 3:
            name, how = s.words[1], s.words[2]
            if how == "normpower":
                try:
                    relations[name] = NormPower(int(s.attrs["exponent"]))
                except (KeyError, ValueError):
                    raise StructureFileError(f"line {s.lineno}: normpower needs exponent=<k>") from None
            elif how == "table":
                mapping, arity = {}, None
                for n, t in s.lines:
                    args, out = _table_line(t, n)
                    vs = tuple(_vector(a, dim, n) for a in args)
                    if arity is None:
                        arity = len(vs)
                    elif arity != len(vs):
                        raise StructureFileError(f"line {n}: inconsistent table arity")
                    try:
                        mapping[vs[0] if arity == 1 else vs] = Fraction(out)
                    except (ValueError, ZeroDivisionError):
                        raise StructureFileError(f"line {n}: bad rational {out!r}") from None
                relations[name] = RelTable(mapping, arity or 1)
            else:
                raise StructureFileError(f"line {s.lineno}: relation kind must be normpower or table")
        else:
            raise StructureFileError(f"line {s.lineno}: unknown section [{' '.join(s.words)}]")
    sig = None
    sig_sections = split_sections(text)
    if sig_sections:
        from .signature import parse_signature_sections
        sig = parse_signature_sections(sig_sections)
    try:
        return FiniteNormedStructure(dim, p, carrier, functions, relations, constants,
                                     name=space.attrs.get("name", ""), signature=sig)
    except ValueError as e:
        raise StructureFileError(str(e)) from None


def _v(v) -> str:
    return " ".join(str(x) for x in v)


def _key_args(key, arity):
    return [key] if arity == 1 else list(key)


def dumps(E: FiniteNormedStructure) -> str:
    norm = "linf" if E.p is INF else f"lp:{E.p}"
    head = f"[space] dim={E.dim} norm={norm}"
    if E.name:
        head += f" name={E.name}"
    lines = [head, "[carrier]"] + [_v(c) for c in E.carrier]
    for name, v in sorted(E.constants.items()):
        lines += [f"[const {name}]", _v(v)]
    for name, f in sorted(E.functions.items()):
        if isinstance(f, Affine):
            lines.append(f"[fn {name} affine]")
            lines += [_v(r) for r in f.matrix] + [_v(f.offset)]
        else:
            lines.append(f"[fn {name} table]")
            for key in sorted(f.mapping):
                args = " | ".join(_v(a) for a in _key_args(key, f.arity))
                lines.append(f"{args} -> {_v(f.mapping[key])}")
    for name, r in sorted(E.relations.items()):
        if isinstance(r, NormPower):
            lines.append(f"[rel {name} normpower] exponent={r.exponent}")
        else:
            lines.append(f"[rel {name} table]")
            for key in sorted(r.mapping):
                args = " | ".join(_v(a) for a in _key_args(key, r.arity))
                lines.append(f"{args} -> {r.mapping[key]}")
    text = "\n".join(lines) + "\n"
    if E.signature is not None:
        from .signature import format_signature
        text += format_signature(E.signature)
    return text


def load(path) -> FiniteNormedStructure:
    return loads(Path(path).read_text(encoding="utf-8"))


def save(E: FiniteNormedStructure, path) -> None:
    Path(path).write_text(dumps(E), encoding="utf-8")
