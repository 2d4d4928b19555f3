"""Space definitions in an INI-style text format.

    [space]
    kind = dk                     # dk | heisenberg-nilmanifold | abelian-nilmanifold | table
    moduli = 3 3                  # dk, abelian-nilmanifold
    degree = 1                    # dk, abelian-nilmanifold, table (optional there)
    modulus = 3                   # heisenberg-nilmanifold
    lattice = 0 0 1 ; 1 0 0       # generators, one digit vector per ';'
    points = 3                    # table
    max_dim = 3
    max_cubes = 1000000

    [cubes]                       # table only: one line per dimension
    1 = 0 0 | 0 1 | ...

Caps fall back to the ``NILCUBE_MAX_DIM`` / ``NILCUBE_MAX_CUBES`` /
``NILCUBE_MAX_POINTS`` environment variables, then to built-in defaults.
"""

from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field

from .cubes import DEFAULT_MAX_DIM
from .cubespace import ENUMERATION_CAP, CubeSpace, ExplicitCubeSpace
from .errors import NilcubeError
from .groups import AbelianGroup, HeisenbergGroup, degree_filtration, make_heisenberg
from .host_kra import dk_space, nilmanifold_space
from .translations import SEARCH_CAP

KINDS = ("dk", "heisenberg-nilmanifold", "abelian-nilmanifold", "table")
_KEYS = {
    "dk": {"moduli", "degree"},
    "heisenberg-nilmanifold": {"modulus", "lattice"},
    "abelian-nilmanifold": {"moduli", "degree", "lattice"},
    "table": {"points", "degree"},
}
_COMMON = {"kind", "max_dim", "max_cubes", "max_points", "name"}


class ConfigError(NilcubeError, ValueError):
    """Parse or validation failure, located at ``line``/``column`` (1-based)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


def env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"environment variable {name} must be positive")
    return value


def default_caps() -> dict[str, int]:
    return {
        "max_dim": env_int("NILCUBE_MAX_DIM", DEFAULT_MAX_DIM),
        "max_cubes": env_int("NILCUBE_MAX_CUBES", ENUMERATION_CAP),
        "max_points": env_int("NILCUBE_MAX_POINTS", SEARCH_CAP),
    }


@dataclass
class SpaceSpec:
    kind: str
    params: dict
    max_dim: int
    max_cubes: int
    max_points: int
    name: str | None = None
    cubes: dict = field(default_factory=dict)

    def build(self, max_dim: int | None = None) -> CubeSpace:
        dim = max_dim or self.max_dim
        p = self.params
        kw = {"max_dim": dim}
        if self.kind == "dk":
            X = dk_space(AbelianGroup(p["moduli"]), p["degree"], max_dim=dim)
        elif self.kind == "abelian-nilmanifold":
            A = AbelianGroup(p["moduli"])
            lat = A.generated(A.from_digits(v) for v in p.get("lattice", []))
            X = nilmanifold_space(degree_filtration(A, p["degree"]), lat, max_dim=dim)
        elif self.kind == "heisenberg-nilmanifold":
            filt = make_heisenberg(p["modulus"])
            G: HeisenbergGroup = filt.group  # type: ignore[assignment]
            lat = G.generated(G.encode(*v) for v in p.get("lattice", []))
            X = nilmanifold_space(filt, lat, max_dim=dim)
        else:
            kw["max_dim"] = min(dim, max(self.cubes) if self.cubes else 1)
            X = ExplicitCubeSpace(p["points"], self.cubes, claimed_degree=p.get("degree"), **kw)
        X.enumeration_cap = self.max_cubes
        if self.name:
            X.name = self.name
        return X


def _locate(text: str, section: str, key: str | None) -> tuple[int | None, int | None]:
    """1-based line and column of ``key``'s value (or the section header)."""
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        m = re.match(r"\[([^\]]+)\]", stripped)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return i, line.index("[") + 1
            continue
        if current == section and key is not None:
            m = re.match(rf"\s*({re.escape(key)})\s*[=:]\s*", line)
            if m:
                return i, m.end() + 1
    return None, None


def _ints(raw: str, what: str, err) -> list[int]:
    try:
        return [int(x) for x in raw.split()]
    except ValueError:
        raise err(f"{what} must be whitespace-separated integers") from None


def parse_space(text: str, max_dim: int | None = None) -> SpaceSpec:
    if not text.strip():
        raise ConfigError("empty space definition", 1, 1)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str  # type: ignore[assignment]
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("expected a [section] header", exc.lineno, 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", exc.lineno, 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section {exc.section!r}", exc.lineno, 1) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line.strip()!r}", lineno, 1) from None
    if not cp.has_section("space"):
        raise ConfigError("missing [space] section", 1, 1)
    sec = cp["space"]

    def fail(key: str | None, message: str):
        line, col = _locate(text, "space", key)
        return ConfigError(message, line, col)

    kind = sec.get("kind", "").strip()
    if kind not in KINDS:
        raise fail("kind" if "kind" in sec else None, f"kind must be one of {', '.join(KINDS)}")
    unknown = set(sec) - _KEYS[kind] - _COMMON
    if unknown:
        key = sorted(unknown)[0]
        raise fail(key, f"key {key!r} does not apply to kind {kind}")
    caps = default_caps()
    if max_dim is not None:
        caps["max_dim"] = max_dim

    def positive(key: str) -> int:
        vals = _ints(sec[key], key, lambda m: fail(key, m))
        if len(vals) != 1 or vals[0] < 1:
            raise fail(key, f"{key} must be one positive integer")
        return vals[0]

    for cap in ("max_dim", "max_cubes", "max_points"):
        if cap in sec and not (cap == "max_dim" and max_dim is not None):
            caps[cap] = positive(cap)
    params: dict = {}
    if "moduli" in _KEYS[kind]:
        if "moduli" not in sec:
            raise fail(None, "missing key 'moduli'")
        mod = _ints(sec["moduli"], "moduli", lambda m: fail("moduli", m))
        if not mod or any(m < 1 for m in mod):
            raise fail("moduli", "moduli must be positive integers")
        params["moduli"] = tuple(mod)
    if "modulus" in _KEYS[kind]:
        if "modulus" not in sec:
            raise fail(None, "missing key 'modulus'")
        params["modulus"] = positive("modulus")
    if "degree" in _KEYS[kind]:
        if "degree" in sec:
            params["degree"] = positive("degree")
        elif kind != "table":
            raise fail(None, "missing key 'degree'")
    if "lattice" in sec:
        width = 3 if kind == "heisenberg-nilmanifold" else len(params.get("moduli", ()))
        gens = []
        for chunk in sec["lattice"].split(";"):
            if not chunk.strip():
                continue
            vec = _ints(chunk, "lattice", lambda m: fail("lattice", m))
            if len(vec) != width:
                raise fail("lattice", f"each lattice generator needs {width} entries")
            gens.append(tuple(vec))
        params["lattice"] = gens
    cubes: dict[int, list[tuple]] = {}
    if kind == "table":
        if "points" not in sec:
            raise fail(None, "missing key 'points'")
        params["points"] = positive("points")
        if cp.has_section("cubes"):
            for key, raw in cp["cubes"].items():
                line, col = _locate(text, "cubes", key)
                if not key.isdigit() or int(key) < 1:
                    raise ConfigError(f"cube dimension {key!r} must be a positive integer", line, 1)
                n = int(key)
                rows = []
                for part in raw.split("|"):
                    if not part.strip():
                        continue
                    try:
                        row = tuple(int(x) for x in part.split())
                    except ValueError:
                        raise ConfigError("cube entries must be integers", line, col) from None
                    if len(row) != 1 << n or not all(0 <= x < params["points"] for x in row):
                        raise ConfigError(f"bad {n}-cube {part.strip()!r}", line, col)
                    rows.append(row)
                cubes[n] = rows
    return SpaceSpec(kind, params, caps["max_dim"], caps["max_cubes"], caps["max_points"],
                     sec.get("name"), cubes)


def load_space(path: str, max_dim: int | None = None) -> tuple[SpaceSpec, str]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_space(text, max_dim), text


def format_table_spec(X: CubeSpace, max_dim: int, degree: int | None = None, remove: dict | None = None) -> str:
    """Text definition listing every cube of ``X`` up to ``max_dim`` (minus ``remove``)."""
    remove = remove or {}
    lines = ["[space]", "kind = table", f"points = {X.npoints}", f"max_dim = {max_dim}"]
    if degree is not None:
        lines.append(f"degree = {degree}")
    lines += ["", "[cubes]"]
    for n in range(1, max_dim + 1):
        drop = {tuple(c) for c in remove.get(n, [])}
        rows = [tuple(int(v) for v in r) for r in X.cubes(n)]
        rows = [r for r in rows if r not in drop]
        lines.append(f"{n} = " + " | ".join(" ".join(map(str, r)) for r in rows))
    return "\n".join(lines) + "\n"
