"""Compile a dense automaton into VHDL and a JSON transition-table artifact.

The generated design is a Moore machine that consumes one character per
clock while ``char_valid`` is high. Failure links are already folded into
the dense table, so each state's case arm lists only direct transitions;
anything not listed returns to the root state.

The JSON artifact carries the same table and is what :func:`load_table`
reads back, so the VHDL's transition semantics can be exercised in
software without a VHDL simulator.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import jsonschema

from .ac_core import Alphabet, Automaton, DenseTable, PatternSet, build_automaton
from .errors import InconsistentTable, InvalidIdentifier, SchemaError, TooManyStates

# basic VHDL identifier: no leading, trailing or doubled underscores
_IDENT = re.compile(r"^[A-Za-z](?:_?[A-Za-z0-9])*$")
MAX_WIDTH = 32


@dataclass(frozen=True)
class EncodingConfig:
    state_encoding: str = "binary"
    entity_name: str = "ac_matcher"
    reset: str = "synchronous"
    char_width: int = 8

    def __post_init__(self):
        if self.state_encoding not in ("binary", "one-hot"):
            raise ValueError(f"unknown state encoding {self.state_encoding!r}")
        if self.reset != "synchronous":
            raise ValueError("only synchronous reset is supported")
        if self.char_width != 8:
            raise ValueError("char_width is fixed at 8 bits")
        if not _IDENT.match(self.entity_name):
            raise InvalidIdentifier(f"{self.entity_name!r} is not a valid VHDL identifier")

    def state_width(self, state_count: int) -> int:
        if self.state_encoding == "one-hot":
            return state_count
        return max(1, math.ceil(math.log2(state_count))) if state_count > 1 else 1

    @staticmethod
    def id_width(pattern_count: int) -> int:
        return max(1, math.ceil(math.log2(pattern_count + 1)))


def _require_dense(a: Automaton) -> DenseTable:
    if a.dense is None:
        raise ValueError("automaton must be dense-compiled first")
    return a.dense


def _state_code(cfg: EncodingConfig, state: int, width: int) -> str:
    if cfg.state_encoding == "one-hot":
        return "".join("1" if bit == state else "0" for bit in reversed(range(width)))
    return format(state, f"0{width}b")


def expected_ports(a: Automaton) -> list:
    """(name, direction, type) for every port, in declaration order."""
    iw = EncodingConfig.id_width(a.pattern_count)
    return [
        ("clk", "in", "std_logic"),
        ("rst", "in", "std_logic"),
        ("char_in", "in", "std_logic_vector(7 downto 0)"),
        ("char_valid", "in", "std_logic"),
        ("match_valid", "out", "std_logic"),
        ("match_count", "out", f"std_logic_vector({iw - 1} downto 0)"),
    ]


def generate_vhdl(a: Automaton, cfg: EncodingConfig = EncodingConfig()) -> str:
    dense = _require_dense(a)
    n = a.state_count
    sw = cfg.state_width(n)
    iw = cfg.id_width(a.pattern_count)
    if sw > MAX_WIDTH or iw > MAX_WIDTH:
        raise TooManyStates(f"state width {sw} / id width {iw} exceeds {MAX_WIDTH} bits")
    symbols = a.alphabet.symbols
    name = cfg.entity_name

    out = [
        f"-- Aho-Corasick matcher: {n} states, {a.pattern_count} patterns, "
        f"{cfg.state_encoding} state encoding.",
        "library ieee;",
        "use ieee.std_logic_1164.all;",
        "use ieee.numeric_std.all;",
        "",
        f"entity {name} is",
        "  port (",
    ]
    ports = expected_ports(a)
    for i, (pname, direction, ptype) in enumerate(ports):
        sep = ";" if i < len(ports) - 1 else ""
        out.append(f"    {pname:<11} : {direction:<3} {ptype}{sep}")
    out += [
        "  );",
        f"end entity {name};",
        "",
        f"architecture rtl of {name} is",
        f"  subtype state_t is std_logic_vector({sw - 1} downto 0);",
    ]
    for s in range(n):
        out.append(f'  constant S{s} : state_t := "{_state_code(cfg, s, sw)}";')
    out += [
        "  signal state : state_t := S0;",
        f"  signal count : unsigned({iw - 1} downto 0);",
        "begin",
        "",
        "  step : process (clk)",
        "  begin",
        "    if rising_edge(clk) then",
        "      if rst = '1' then",
        "        state <= S0;",
        "      elsif char_valid = '1' then",
        "        case state is",
    ]
    for s in range(n):
        out.append(f"          when S{s} =>")
        targets: dict = {}
        for col, t in enumerate(dense.delta[s]):
            if t != 0:
                targets.setdefault(t, []).append(symbols[col])
        out.append("            case char_in is")
        for t in sorted(targets):
            choice = " | ".join(f'x"{b:02X}"' for b in targets[t])
            out.append(f"              when {choice} => state <= S{t};")
        out.append("              when others => state <= S0;")
        out.append("            end case;")
    out += [
        "          when others =>",
        "            state <= S0;",
        "        end case;",
        "      end if;",
        "    end if;",
        "  end process step;",
        "",
    ]
    hits = [(s, len(o)) for s, o in enumerate(dense.outputs) if o]
    if hits:
        out.append("  with state select count <=")
        for s, k in hits:
            out.append(f"    to_unsigned({k}, {iw}) when S{s},")
        out.append(f"    to_unsigned(0, {iw}) when others;")
        out.append("")
        out.append("  match_valid <= '0' when count = 0 else '1';")
    else:
        out.append("  count <= (others => '0');")
        out.append("")
        out.append("  match_valid <= '0';")
    out += [
        "  match_count <= std_logic_vector(count);",
        "",
        "end architecture rtl;",
        "",
    ]
    return "\n".join(out)


# -- validation ---------------------------------------------------------------

_ENTITY_RE = re.compile(r"^\s*entity\s+(\w+)\s+is\s*$", re.M)
_PORT_BLOCK_RE = re.compile(r"port\s*\((.*?)\n\s*\);", re.S)
_PORT_RE = re.compile(r"^\s*(\w+)\s*:\s*(in|out|inout)\s+(.+?);?\s*$")
_SUBTYPE_RE = re.compile(r"subtype\s+state_t\s+is\s+std_logic_vector\((\d+)\s+downto\s+0\)")
_ARM_RE = re.compile(r"^\s*when S(\d+) =>\s*$", re.M)
_TARGET_RE = re.compile(r"state <= S(\d+);")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_text(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}" for c in self.checks]
        lines.append(f"overall: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {"ok": self.ok,
               "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                          for c in self.checks]}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def validate_design(vhdl: str, a: Automaton, cfg: EncodingConfig = EncodingConfig()) -> ValidationReport:
    """Structural scan of generated VHDL against the automaton it came from."""
    n = a.state_count
    report = ValidationReport()

    m = _ENTITY_RE.search(vhdl)
    found = m.group(1) if m else None
    report.checks.append(Check("entity_name", found == cfg.entity_name,
                               f"expected {cfg.entity_name}, found {found}"))

    block = _PORT_BLOCK_RE.search(vhdl)
    ports = []
    if block:
        for line in block.group(1).splitlines():
            pm = _PORT_RE.match(line)
            if pm:
                ports.append((pm.group(1), pm.group(2), pm.group(3).strip()))
    want = expected_ports(a)
    report.checks.append(Check("ports", ports == want,
                               f"{len(ports)} ports" if ports == want else f"expected {want}, found {ports}"))

    sm = _SUBTYPE_RE.search(vhdl)
    width = int(sm.group(1)) + 1 if sm else None
    want_w = cfg.state_width(n)
    report.checks.append(Check("state_width", width == want_w,
                               f"expected {want_w}, found {width}"))

    arms = [int(x) for x in _ARM_RE.findall(vhdl)]
    arms_ok = len(arms) == n and sorted(arms) == list(range(n))
    report.checks.append(Check("case_arms", arms_ok,
                               f"expected {n} arms, found {len(arms)} ({len(set(arms))} distinct)"))

    targets = [int(x) for x in _TARGET_RE.findall(vhdl)]
    bad = sorted({t for t in targets if t >= n})
    report.checks.append(Check("target_range", not bad and bool(targets),
                               f"{len(targets)} targets" + (f", out of range: {bad[:5]}" if bad else "")))
    return report


# -- table artifact -----------------------------------------------------------

TABLE_SCHEMA = {
    "type": "object",
    "required": ["alphabet", "sentinel", "state_count", "pattern_count",
                 "delta", "outputs", "patterns"],
    "properties": {
        "alphabet": {"type": "string", "minLength": 1},
        "sentinel": {"type": "string", "minLength": 1, "maxLength": 1},
        "state_count": {"type": "integer", "minimum": 1},
        "pattern_count": {"type": "integer", "minimum": 0},
        "delta": {"type": "array",
                  "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "outputs": {"type": "array",
                    "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "patterns": {"type": "array", "items": {"type": "string", "minLength": 1}},
    },
}


def generate_table(a: Automaton) -> dict:
    dense = _require_dense(a)
    return {
        "alphabet": bytes(sorted(a.alphabet.allowed_symbols)).decode("latin-1"),
        "sentinel": chr(a.alphabet.sentinel),
        "state_count": a.state_count,
        "pattern_count": a.pattern_count,
        "delta": [list(row) for row in dense.delta],
        "outputs": [list(o) for o in dense.outputs],
        "patterns": [p.decode("latin-1") for p in a.patterns],
    }


def table_json(a: Automaton) -> str:
    """Canonical serialization: sorted keys, one delta row per line."""
    doc = generate_table(a)
    parts = ["{"]
    for k in sorted(doc):
        v = doc[k]
        if k in ("delta", "outputs"):
            rows = ",\n".join("    " + json.dumps(r, separators=(",", ":")) for r in v)
            parts.append(f'  "{k}": [\n{rows}\n  ],' if v else f'  "{k}": [],')
        else:
            parts.append(f"  {json.dumps(k)}: {json.dumps(v, separators=(',', ':'))},")
    parts[-1] = parts[-1].rstrip(",")
    parts.append("}")
    return "\n".join(parts) + "\n"


def load_table(doc: dict | str) -> Automaton:
    """Rebuild an automaton from a table artifact and check it is consistent."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"invalid JSON: {exc}") from None
    try:
        jsonschema.validate(doc, TABLE_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(path, exc.message) from None

    n = doc["state_count"]
    alphabet = Alphabet(frozenset(doc["alphabet"].encode("latin-1")), ord(doc["sentinel"]))
    ncols = len(alphabet.symbols)
    delta, outputs = doc["delta"], doc["outputs"]
    if len(delta) != n or len(outputs) != n:
        raise InconsistentTable(f"expected {n} delta rows and output lists")
    for s, row in enumerate(delta):
        if len(row) != ncols:
            raise InconsistentTable(f"delta row {s} has {len(row)} columns, expected {ncols}")
        for v in row:
            if v >= n:
                raise InconsistentTable(f"delta[{s}] targets state {v} >= state_count {n}")
    if len(doc["patterns"]) != doc["pattern_count"]:
        raise InconsistentTable("pattern_count does not match the pattern list")
    for s, ids in enumerate(outputs):
        for pid in ids:
            if pid >= doc["pattern_count"]:
                raise InconsistentTable(f"outputs[{s}] names pattern {pid} >= pattern_count")

    patterns = PatternSet(tuple(p.encode("latin-1") for p in doc["patterns"]))
    a = build_automaton(patterns, alphabet)
    if a.state_count != n:
        raise InconsistentTable(f"patterns yield {a.state_count} states, table has {n}")
    if a.dense.delta != delta:
        raise InconsistentTable("delta does not match the automaton of the listed patterns")
    if [list(o) for o in a.dense.outputs] != outputs:
        raise InconsistentTable("outputs do not match the automaton of the listed patterns")
    a.dense = DenseTable(delta=[list(r) for r in delta],
                         outputs=[tuple(o) for o in outputs])
    return a
