"""Graph model definition language.

Statements have the form ``CREATE <GRAPH|VERTEX|EDGE>(Key: value, ...);`` and
the ``Query`` value embeds a conjunctive SQL subset::

    SELECT <null | col [AS name], ...> FROM table [[AS] alias], ...
    [WHERE a.x = b.y AND a.z < 3 ...]

Keywords are case-insensitive; identifiers are case-sensitive.  A FROM item
written without an alias whose name is not a known table but ends in digits
(``C1``, ``SS2``) is read as an alias of the table named by the stem.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterator, Protocol

from .errors import DSLError
from .relational.values import Kind, compatible, kind_of

KEYWORDS = {"CREATE", "GRAPH", "VERTEX", "EDGE", "SELECT", "FROM", "WHERE", "AND", "AS",
            "NULL", "TRUE", "FALSE"}
SQL_RESERVED = {"SELECT", "FROM", "WHERE", "AND", "AS", "NULL", "TRUE", "FALSE"}
OPERATORS = ("<=", ">=", "<>", "!=", "=", "<", ">")


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class ColRef:
    alias: str
    column: str

    def __str__(self) -> str:
        return f"{self.alias}.{self.column}"


@dataclass(frozen=True)
class Literal:
    value: int | float | str | bool

    def __str__(self) -> str:
        v = self.value
        if v is True:
            return "TRUE"
        if v is False:
            return "FALSE"
        if isinstance(v, str):
            return "'" + v.replace("'", "''") + "'"
        return repr(v)


@dataclass(frozen=True)
class Comparison:
    left: ColRef
    op: str
    right: ColRef | Literal

    @property
    def aliases(self) -> frozenset[str]:
        if isinstance(self.right, ColRef):
            return frozenset((self.left.alias, self.right.alias))
        return frozenset((self.left.alias,))

    @property
    def is_join(self) -> bool:
        return len(self.aliases) == 2

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class SelectItem:
    col: ColRef
    name: str

    def __str__(self) -> str:
        return str(self.col) if self.name == self.col.column else f"{self.col} AS {self.name}"


@dataclass(frozen=True)
class FromItem:
    table: str
    alias: str

    def __str__(self) -> str:
        return self.table if self.alias == self.table else f"{self.table} AS {self.alias}"


@dataclass(frozen=True)
class ParsedQuery:
    select: tuple[SelectItem, ...]
    from_: tuple[FromItem, ...]
    where: tuple[Comparison, ...]

    def alias_table(self, alias: str) -> str:
        for item in self.from_:
            if item.alias == alias:
                return item.table
        raise KeyError(alias)

    @property
    def aliases(self) -> list[str]:
        return [f.alias for f in self.from_]

    def render(self) -> str:
        sel = ", ".join(str(s) for s in self.select) if self.select else "null"
        text = f"SELECT {sel} FROM " + ", ".join(str(f) for f in self.from_)
        if self.where:
            text += " WHERE " + " AND ".join(str(c) for c in self.where)
        return text


@dataclass(frozen=True)
class VertexDef:
    label: str
    table: str
    id_column: str
    query: ParsedQuery
    pos: tuple[int, int] = field(default=(0, 0), compare=False)

    @property
    def properties(self) -> list[SelectItem]:
        return [s for s in self.query.select if s.col.column != self.id_column]


@dataclass(frozen=True)
class EdgeDef:
    label: str
    src_label: str
    dst_label: str
    query: ParsedQuery
    src: ColRef
    dst: ColRef
    pos: tuple[int, int] = field(default=(0, 0), compare=False)

    @property
    def properties(self) -> tuple[SelectItem, ...]:
        return self.query.select


@dataclass(frozen=True)
class GraphModelDef:
    name: str
    vertices: tuple[VertexDef, ...] = ()
    edges: tuple[EdgeDef, ...] = ()

    def vertex(self, label: str) -> VertexDef:
        for v in self.vertices:
            if v.label == label:
                return v
        raise KeyError(label)

    def edge(self, label: str) -> EdgeDef:
        for e in self.edges:
            if e.label == label:
                return e
        raise KeyError(label)


# --------------------------------------------------------------------------- lexer


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUMBER, STRING, OP, PUNCT, EOF
    text: str
    line: int
    col: int

    @property
    def upper(self) -> str:
        return self.text.upper()


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<number>-?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'(?:[^']|'')*')
  | (?P<op><=|>=|<>|!=|=|<|>)
  | (?P<punct>[(),:;.*])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            if text[pos] == "'":
                raise DSLError("unterminated string literal", line, col)
            raise DSLError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        else:
            tokens.append(Token(kind.upper(), value, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------- parser


@dataclass
class _RawFrom:
    name: str
    alias: str | None
    tok: Token


@dataclass
class _RawQuery:
    select: list[tuple[tuple[str | None, str], str | None, Token]] | None  # None means "null"
    from_: list[_RawFrom]
    where: list[tuple[object, str, object, Token]]
    tok: Token


@dataclass
class _RawStatement:
    kind: str
    fields: dict[str, tuple[object, Token]]
    tok: Token


_KEYS = {
    "GRAPH_NAME": "Graph_Name", "LABEL": "Label", "ID_COLUMN": "ID_Column", "QUERY": "Query",
    "SRC_LABEL": "Src_Label", "DST_LABEL": "Dst_Label", "SRC_ALIAS": "Src_Alias",
    "DST_ALIAS": "Dst_Alias",
}
_REQUIRED = {
    "GRAPH": {"Graph_Name"},
    "VERTEX": {"Graph_Name", "Label", "ID_Column", "Query"},
    "EDGE": {"Graph_Name", "Label", "Src_Label", "Dst_Label", "Query"},
}
_ALLOWED = {
    "GRAPH": {"Graph_Name"},
    "VERTEX": {"Graph_Name", "Label", "ID_Column", "Query"},
    "EDGE": {"Graph_Name", "Label", "Src_Label", "Dst_Label", "Query", "Src_Alias", "Dst_Alias"},
}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> DSLError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return DSLError(f"{message} (found {found})", tok.line, tok.col)

    def expect_punct(self, text: str) -> Token:
        if self.tok.kind != "PUNCT" or self.tok.text != text:
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        if self.tok.kind != "IDENT" or self.tok.upper != word:
            raise self.error(f"expected {word}")
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.tok.kind == "IDENT" and self.tok.upper == word

    def at_punct(self, text: str) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.text == text

    def ident(self, what: str, allow_reserved: bool = False) -> Token:
        if self.tok.kind != "IDENT" or (not allow_reserved and self.tok.upper in SQL_RESERVED):
            raise self.error(f"expected {what}")
        return self.advance()

    # statements ---------------------------------------------------------

    def statements(self) -> list[_RawStatement]:
        out = []
        while self.tok.kind != "EOF":
            out.append(self.statement())
        return out

    def statement(self) -> _RawStatement:
        start = self.expect_keyword("CREATE")
        kind_tok = self.tok
        if kind_tok.kind != "IDENT" or kind_tok.upper not in _REQUIRED:
            raise self.error("expected GRAPH, VERTEX or EDGE")
        kind = self.advance().upper
        self.expect_punct("(")
        fields: dict[str, tuple[object, Token]] = {}
        while True:
            key_tok = self.ident("a key name", allow_reserved=True)
            key = _KEYS.get(key_tok.upper)
            if key is None or key not in _ALLOWED[kind]:
                raise self.error(f"unknown key {key_tok.text!r} for CREATE {kind}", key_tok)
            if key in fields:
                raise self.error(f"duplicate key {key}", key_tok)
            self.expect_punct(":")
            if key == "Query":
                value: object = self.query()
            else:
                value = self.ident(f"a value for {key}").text
            fields[key] = (value, key_tok)
            if self.at_punct(","):
                self.advance()
                continue
            break
        self.expect_punct(")")
        self.expect_punct(";")
        missing = _REQUIRED[kind] - fields.keys()
        if missing:
            raise DSLError(f"CREATE {kind} is missing {', '.join(sorted(missing))}",
                           start.line, start.col)
        return _RawStatement(kind, fields, start)

    # SQL subset -----------------------------------------------------------

    def query(self) -> _RawQuery:
        start = self.expect_keyword("SELECT")
        select: list | None
        if self.at_keyword("NULL"):
            self.advance()
            select = None
        else:
            if self.at_punct("*"):
                raise self.error("SELECT * is not supported; list the columns")
            select = [self.select_item()]
            while self.at_punct(","):
                # a comma followed by KEY ':' ends the query inside a statement
                if self._comma_ends_query():
                    break
                self.advance()
                select.append(self.select_item())
        self.expect_keyword("FROM")
        from_ = [self.from_item()]
        while self.at_punct(",") and not self._comma_ends_query():
            self.advance()
            from_.append(self.from_item())
        where = []
        if self.at_keyword("WHERE"):
            self.advance()
            where.append(self.comparison())
            while self.at_keyword("AND"):
                self.advance()
                where.append(self.comparison())
        return _RawQuery(select, from_, where, start)

    def _comma_ends_query(self) -> bool:
        nxt = self.toks[self.i + 1] if self.i + 1 < len(self.toks) else None
        after = self.toks[self.i + 2] if self.i + 2 < len(self.toks) else None
        return (nxt is not None and nxt.kind == "IDENT" and after is not None
                and after.kind == "PUNCT" and after.text == ":")

    def colref(self) -> tuple[tuple[str | None, str], Token]:
        first = self.ident("a column reference")
        if self.at_punct("."):
            self.advance()
            second = self.ident("a column name")
            return (first.text, second.text), first
        return (None, first.text), first

    def select_item(self):
        ref, tok = self.colref()
        name = None
        if self.at_keyword("AS"):
            self.advance()
            name = self.ident("a property name").text
        return (ref, name, tok)

    def from_item(self) -> _RawFrom:
        name = self.ident("a table name")
        alias = None
        if self.at_keyword("AS"):
            self.advance()
            alias = self.ident("an alias").text
        elif self.tok.kind == "IDENT" and self.tok.upper not in SQL_RESERVED and not self._alias_is_key():
            alias = self.advance().text
        return _RawFrom(name.text, alias, name)

    def _alias_is_key(self) -> bool:
        nxt = self.toks[self.i + 1] if self.i + 1 < len(self.toks) else None
        return nxt is not None and nxt.kind == "PUNCT" and nxt.text == ":"

    def operand(self):
        tok = self.tok
        if tok.kind == "NUMBER":
            self.advance()
            text = tok.text
            value = float(text) if any(c in text for c in ".eE") else int(text)
            if value != value or value in (float("inf"), float("-inf")):
                raise self.error("numeric literal out of range")
            return Literal(value), tok
        if tok.kind == "STRING":
            self.advance()
            return Literal(tok.text[1:-1].replace("''", "'")), tok
        if tok.kind == "IDENT" and tok.upper in ("TRUE", "FALSE"):
            self.advance()
            return Literal(tok.upper == "TRUE"), tok
        if tok.kind == "IDENT" and tok.upper == "NULL":
            raise self.error("comparison with null is never true; not supported")
        ref, rtok = self.colref()
        return ref, rtok

    def comparison(self):
        left, ltok = self.operand()
        if self.tok.kind != "OP":
            raise self.error("expected a comparison operator")
        op = self.advance().text
        right, _ = self.operand()
        if isinstance(left, Literal) and isinstance(right, Literal):
            raise DSLError("comparison between two constants", ltok.line, ltok.col)
        return (left, op, right, ltok)


# --------------------------------------------------------------------------- resolution


class Catalog(Protocol):
    def __contains__(self, table: str) -> bool: ...

    def has_column(self, table: str, column: str) -> bool: ...

    def column_kind(self, table: str, column: str) -> Kind: ...


_DIGITS = re.compile(r"^(.*?[A-Za-z_])(\d+)$")


def _stem(name: str) -> str | None:
    m = _DIGITS.match(name)
    return m.group(1) if m else None


def normalize_comparison(left: ColRef | Literal, op: str, right: ColRef | Literal) -> Comparison:
    from .relational.operators import FLIPPED

    op = "<>" if op == "!=" else op
    if isinstance(left, Literal):
        left, right, op = right, left, FLIPPED[op]
    if isinstance(right, ColRef) and str(right) < str(left):
        left, right, op = right, left, FLIPPED[op]
    return Comparison(left, op, right)


class _Resolver:
    def __init__(self, statements: list[_RawStatement], catalog: Catalog | None):
        self.statements = statements
        self.catalog = catalog
        known: set[str] = set()
        for st in statements:
            q = st.fields.get("Query", (None,))[0]
            if isinstance(q, _RawQuery):
                for f in q.from_:
                    if f.alias is not None or _stem(f.name) is None:
                        known.add(f.name)
        self.known = known

    def is_table(self, name: str) -> bool:
        if self.catalog is not None:
            return name in self.catalog
        return name in self.known

    def from_item(self, raw: _RawFrom) -> FromItem:
        if raw.alias is not None:
            table = raw.name
            if self.catalog is not None and table not in self.catalog:
                raise DSLError(f"unknown table {table!r}", raw.tok.line, raw.tok.col)
            return FromItem(table, raw.alias)
        if self.is_table(raw.name):
            return FromItem(raw.name, raw.name)
        stem = _stem(raw.name)
        if stem is not None and self.is_table(stem):
            return FromItem(stem, raw.name)
        if self.catalog is not None:
            raise DSLError(f"unknown table {raw.name!r}", raw.tok.line, raw.tok.col)
        return FromItem(raw.name, raw.name)

    def query(self, raw: _RawQuery) -> ParsedQuery:
        from_ = tuple(self.from_item(f) for f in raw.from_)
        aliases: dict[str, str] = {}
        for f, rf in zip(from_, raw.from_):
            if f.alias in aliases:
                raise DSLError(f"duplicate alias {f.alias!r}", rf.tok.line, rf.tok.col)
            aliases[f.alias] = f.table

        def col(ref: tuple[str | None, str], tok: Token) -> ColRef:
            alias, column = ref
            if alias is None:
                if len(from_) == 1:
                    alias = from_[0].alias
                elif self.catalog is not None:
                    owners = [f.alias for f in from_ if self.catalog.has_column(f.table, column)]
                    if len(owners) != 1:
                        raise DSLError(f"column {column!r} is ambiguous or unknown; qualify it",
                                       tok.line, tok.col)
                    alias = owners[0]
                else:
                    raise DSLError(f"unqualified column {column!r} in a multi-table query",
                                   tok.line, tok.col)
            if alias not in aliases:
                raise DSLError(f"undeclared alias {alias!r}", tok.line, tok.col)
            if self.catalog is not None and not self.catalog.has_column(aliases[alias], column):
                raise DSLError(f"unknown column {aliases[alias]}.{column}", tok.line, tok.col)
            return ColRef(alias, column)

        select: list[SelectItem] = []
        if raw.select is not None:
            names = set()
            for ref, name, tok in raw.select:
                c = col(ref, tok)
                item = SelectItem(c, name or c.column)
                if item.name in names:
                    raise DSLError(f"duplicate output name {item.name!r}; use AS", tok.line, tok.col)
                names.add(item.name)
                select.append(item)
        where = []
        for left, op, right, tok in raw.where:
            lhs = left if isinstance(left, Literal) else col(left, tok)
            rhs = right if isinstance(right, Literal) else col(right, tok)
            where.append(normalize_comparison(lhs, op, rhs))
        where.sort(key=str)
        return ParsedQuery(tuple(select), from_, tuple(where))

    def model(self) -> GraphModelDef:
        graph_name = None
        vertices: list[VertexDef] = []
        edges: list[EdgeDef] = []
        labels: dict[str, set[str]] = {"VERTEX": set(), "EDGE": set()}
        for st in self.statements:
            name, name_tok = st.fields["Graph_Name"]
            if st.kind == "GRAPH":
                if graph_name is not None:
                    raise DSLError("only one CREATE GRAPH is allowed", st.tok.line, st.tok.col)
                graph_name = name
                continue
            if graph_name is None:
                raise DSLError("CREATE GRAPH must come first", st.tok.line, st.tok.col)
            if name != graph_name:
                raise DSLError(f"unknown graph {name!r}", name_tok.line, name_tok.col)
            label, label_tok = st.fields["Label"]
            if label in labels[st.kind]:
                raise DSLError(f"duplicate {st.kind.lower()} label {label!r}",
                               label_tok.line, label_tok.col)
            labels[st.kind].add(label)
            raw_q, q_tok = st.fields["Query"]
            query = self.query(raw_q)
            pos = (st.tok.line, st.tok.col)
            if st.kind == "VERTEX":
                vertices.append(self.vertex(label, st, query, q_tok, pos))
            else:
                edges.append(self.edge(label, st, query, vertices, pos))
        if graph_name is None:
            tok = self.statements[0].tok if self.statements else Token("EOF", "", 1, 1)
            raise DSLError("missing CREATE GRAPH", tok.line, tok.col)
        return GraphModelDef(graph_name, tuple(vertices), tuple(edges))

    def vertex(self, label, st, query: ParsedQuery, q_tok: Token, pos) -> VertexDef:
        if len(query.from_) != 1 or query.where and any(c.is_join for c in query.where):
            raise DSLError(f"vertex {label!r}: property query must read exactly one table",
                           q_tok.line, q_tok.col)
        id_col, id_tok = st.fields["ID_Column"]
        table = query.from_[0].table
        if self.catalog is not None and not self.catalog.has_column(table, id_col):
            raise DSLError(f"vertex {label!r}: unknown id column {table}.{id_col}",
                           id_tok.line, id_tok.col)
        return VertexDef(label, table, id_col, query, pos)

    def edge(self, label, st, query: ParsedQuery, vertices: list[VertexDef], pos) -> EdgeDef:
        ends = []
        for key in ("Src_Label", "Dst_Label"):
            vlabel, tok = st.fields[key]
            match = [v for v in vertices if v.label == vlabel]
            if not match:
                raise DSLError(f"edge {label!r}: undeclared vertex label {vlabel!r}", tok.line, tok.col)
            ends.append((match[0], tok))
        (src_v, src_tok), (dst_v, dst_tok) = ends
        src_aliases = [f.alias for f in query.from_ if f.table == src_v.table]
        dst_aliases = [f.alias for f in query.from_ if f.table == dst_v.table]
        bindings = []
        for key, aliases, vdef, tok, pick in (("Src_Alias", src_aliases, src_v, src_tok, 0),
                                               ("Dst_Alias", dst_aliases, dst_v, dst_tok, -1)):
            if key in st.fields:
                alias, atok = st.fields[key]
                if alias not in aliases:
                    raise DSLError(f"edge {label!r}: {key} {alias!r} is not a FROM alias of table "
                                   f"{vdef.table!r}", atok.line, atok.col)
            elif not aliases:
                raise DSLError(f"edge {label!r}: no FROM item reads vertex table {vdef.table!r}",
                               tok.line, tok.col)
            else:
                same = src_v.table == dst_v.table
                alias = aliases[pick] if same else aliases[0]
            bindings.append(ColRef(alias, vdef.id_column))
        return EdgeDef(label, src_v.label, dst_v.label, query, bindings[0], bindings[1], pos)


def parse_model(text: str, catalog: Catalog | None = None) -> GraphModelDef:
    """Parse DSL source into a resolved, normalized :class:`GraphModelDef`.

    With a ``catalog`` table and column names are checked during resolution;
    without one only the model's internal consistency is checked.
    """
    statements = _Parser(text).statements()
    return _Resolver(statements, catalog).model()


def parse_query(text: str, catalog: Catalog | None = None) -> ParsedQuery:
    """Parse a standalone query of the embedded SQL subset."""
    p = _Parser(text)
    raw = p.query()
    if p.tok.kind != "EOF":
        raise p.error("unexpected trailing input")
    return _Resolver([_RawStatement("EDGE", {"Query": (raw, raw.tok)}, raw.tok)], catalog).query(raw)


def render_model(model: GraphModelDef) -> str:
    """Render the normalized form; ``parse_model(render_model(m)) == m``."""
    g = model.name
    lines = [f"CREATE GRAPH(Graph_Name: {g});"]
    for v in model.vertices:
        lines.append(f"CREATE VERTEX(Graph_Name: {g}, Label: {v.label}, ID_Column: {v.id_column}, "
                     f"Query: {v.query.render()});")
    for e in model.edges:
        lines.append(f"CREATE EDGE(Graph_Name: {g}, Label: {e.label}, Src_Label: {e.src_label}, "
                     f"Dst_Label: {e.dst_label}, Src_Alias: {e.src.alias}, Dst_Alias: {e.dst.alias}, "
                     f"Query: {e.query.render()});")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- validation


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int = 0
    col: int = 0

    def to_json(self) -> str:
        return json.dumps({"code": self.code, "message": self.message,
                           "location": {"line": self.line, "col": self.col}})


def _query_diagnostics(query: ParsedQuery, db: Catalog, owner: str, pos) -> Iterator[Diagnostic]:
    tables_ok = {}
    for f in query.from_:
        ok = f.table in db
        tables_ok[f.alias] = ok
        if not ok:
            yield Diagnostic("unknown-table", f"{owner}: table {f.table!r} does not exist", *pos)

    def col_ok(ref: ColRef) -> bool:
        if not tables_ok.get(ref.alias, False):
            return False
        table = query.alias_table(ref.alias)
        return db.has_column(table, ref.column)

    refs = [s.col for s in query.select]
    for c in query.where:
        refs.append(c.left)
        if isinstance(c.right, ColRef):
            refs.append(c.right)
    seen = set()
    for ref in refs:
        if ref in seen or not tables_ok.get(ref.alias, False):
            continue
        seen.add(ref)
        if not col_ok(ref):
            yield Diagnostic("unknown-column",
                             f"{owner}: column {query.alias_table(ref.alias)}.{ref.column} does not exist",
                             *pos)
    for c in query.where:
        if not col_ok(c.left):
            continue
        lk = db.column_kind(query.alias_table(c.left.alias), c.left.column)
        if isinstance(c.right, ColRef):
            if not col_ok(c.right):
                continue
            rk = db.column_kind(query.alias_table(c.right.alias), c.right.column)
        else:
            rk = kind_of(c.right.value)
        if not compatible(lk, rk):
            yield Diagnostic("kind-mismatch",
                             f"{owner}: {c} compares {lk.value} with {rk.value}", *pos)


def validate_against_catalog(model: GraphModelDef, db: Catalog) -> list[Diagnostic]:
    """Every problem found, in model order; empty iff the model is usable on ``db``."""
    out: list[Diagnostic] = []
    for v in model.vertices:
        out.extend(_query_diagnostics(v.query, db, f"vertex {v.label}", v.pos))
        if v.table in db and not db.has_column(v.table, v.id_column):
            out.append(Diagnostic("unknown-column",
                                  f"vertex {v.label}: id column {v.table}.{v.id_column} does not exist",
                                  *v.pos))
    for e in model.edges:
        out.extend(_query_diagnostics(e.query, db, f"edge {e.label}", e.pos))
        for ref, vlabel in ((e.src, e.src_label), (e.dst, e.dst_label)):
            vdef = model.vertex(vlabel)
            table = e.query.alias_table(ref.alias)
            if table in db and vdef.table in db and db.has_column(table, ref.column) \
                    and db.has_column(vdef.table, vdef.id_column):
                if not compatible(db.column_kind(table, ref.column),
                                  db.column_kind(vdef.table, vdef.id_column)):
                    out.append(Diagnostic("kind-mismatch",
                                          f"edge {e.label}: endpoint {ref} does not match "
                                          f"{vlabel} ids", *e.pos))
    return out
