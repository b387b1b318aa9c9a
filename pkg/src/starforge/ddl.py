"""Parser for the CREATE TABLE subset the catalog accepts.

Anything outside the subset is an explicit UnsupportedFeatureError rather
than a guess: silently misreading a source schema is worse than refusing it.
The parser is total -- any input string yields a catalog or a positioned
error, never a crash.
"""

from __future__ import annotations

from dataclasses import dataclass

from .catalog import ColumnDef, ColumnType, FkDef, RelationalCatalog, TableDef, ensure_valid
from .errors import DdlSyntaxError, UnsupportedFeatureError

_KEYWORDS = {
    "create", "table", "primary", "key", "foreign", "references", "not", "null",
}

# Recognized so we can refuse them by name instead of with a generic error.
_REJECTED_WORDS = {
    "check": "CHECK constraints",
    "unique": "UNIQUE constraints",
    "default": "DEFAULT values",
    "constraint": "named constraints",
    "index": "indexes",
    "view": "views",
    "trigger": "triggers",
    "alter": "ALTER statements",
    "drop": "DROP statements",
    "insert": "DML statements",
    "select": "DML statements",
}

_TYPE_WORDS = {"integer", "bigint", "decimal", "varchar", "date", "timestamp", "boolean"}


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | qident | number | punct | eof
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "-" and text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise DdlSyntaxError("unterminated quoted identifier", start_line, start_col)
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        buf.append('"')
                        j += 2
                        continue
                    j += 1
                    break
                if text[j] == "\n":
                    raise DdlSyntaxError("newline in quoted identifier", start_line, start_col)
                buf.append(text[j])
                j += 1
            tokens.append(_Token("qident", "".join(buf), start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j].lower(), start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("number", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in "(),;":
            tokens.append(_Token("punct", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch in "<>=*+-./'`[]":
            # Legal SQL characters outside the subset grammar; tokenized so
            # the parser can name the offending construct instead of the
            # tokenizer choking on a single character.
            tokens.append(_Token("op", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise DdlSyntaxError(f"unexpected character {ch!r}", start_line, start_col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, expected: str) -> DdlSyntaxError:
        tok = self.peek()
        got = tok.text if tok.kind != "eof" else "end of input"
        return DdlSyntaxError(f"unexpected {got!r}", tok.line, tok.column, expected=expected)

    def expect_keyword(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == word:
            return self.advance()
        raise self.fail(word.upper())

    def expect_punct(self, ch: str) -> _Token:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == ch:
            return self.advance()
        raise self.fail(repr(ch))

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text == word

    def identifier(self, what: str) -> str:
        tok = self.peek()
        if tok.kind == "qident":
            self.advance()
            return tok.text
        if tok.kind == "ident":
            if tok.text in _REJECTED_WORDS:
                raise UnsupportedFeatureError(
                    f"{_REJECTED_WORDS[tok.text]} are not supported "
                    f"(line {tok.line}, column {tok.column})"
                )
            if tok.text in _KEYWORDS:
                raise self.fail(what)
            self.advance()
            return tok.text
        raise self.fail(what)

    def number(self) -> int:
        tok = self.peek()
        if tok.kind != "number":
            raise self.fail("a number")
        self.advance()
        return int(tok.text)


def parse_ddl(ddl_text: str) -> RelationalCatalog:
    """Parse a sequence of CREATE TABLE statements into a validated catalog."""
    parser = _Parser(_tokenize(ddl_text))
    tables: list[TableDef] = []
    while parser.peek().kind != "eof":
        tables.append(_parse_create_table(parser))
    return ensure_valid(RelationalCatalog(schema_name="main", tables=tuple(tables)))


def _parse_create_table(p: _Parser) -> TableDef:
    tok = p.peek()
    if tok.kind == "ident" and tok.text in _REJECTED_WORDS:
        raise UnsupportedFeatureError(
            f"{_REJECTED_WORDS[tok.text]} are not supported (line {tok.line}, column {tok.column})"
        )
    p.expect_keyword("create")
    after_create = p.peek()
    if after_create.kind == "ident" and after_create.text in _REJECTED_WORDS:
        raise UnsupportedFeatureError(
            f"{_REJECTED_WORDS[after_create.text]} are not supported "
            f"(line {after_create.line}, column {after_create.column})"
        )
    p.expect_keyword("table")
    name = p.identifier("a table name")
    p.expect_punct("(")

    columns: list[ColumnDef] = []
    pk: tuple[str, ...] = ()
    inline_pk: list[str] = []
    fks: list[FkDef] = []
    saw_table_pk = False

    while True:
        if p.at_keyword("primary"):
            tok = p.peek()
            if saw_table_pk:
                raise DdlSyntaxError("duplicate PRIMARY KEY clause", tok.line, tok.column)
            pk = _parse_table_pk(p)
            saw_table_pk = True
        elif p.at_keyword("foreign"):
            fks.append(_parse_table_fk(p))
        else:
            col, is_pk = _parse_column(p)
            columns.append(col)
            if is_pk:
                inline_pk.append(col.name)
        tok = p.peek()
        if tok.kind == "punct" and tok.text == ",":
            p.advance()
            continue
        if tok.kind == "punct" and tok.text == ")":
            p.advance()
            break
        raise p.fail("',' or ')'")

    p.expect_punct(";")

    if saw_table_pk and inline_pk:
        raise DdlSyntaxError(
            "both inline and table-level PRIMARY KEY declared", tok.line, tok.column
        )
    if not saw_table_pk:
        pk = tuple(inline_pk)

    # PK columns are implicitly NOT NULL, as in standard SQL.
    final_columns = tuple(
        ColumnDef(c.name, c.data_type, nullable=False) if c.name in pk else c for c in columns
    )
    return TableDef(name=name, columns=final_columns, primary_key=pk, foreign_keys=tuple(fks))


def _parse_column(p: _Parser) -> tuple[ColumnDef, bool]:
    name = p.identifier("a column name")
    col_type = _parse_type(p)
    nullable = True
    is_pk = False
    while True:
        tok = p.peek()
        if tok.kind != "ident":
            break
        if tok.text == "not":
            p.advance()
            p.expect_keyword("null")
            nullable = False
        elif tok.text == "primary":
            p.advance()
            p.expect_keyword("key")
            is_pk = True
            nullable = False
        elif tok.text == "references":
            raise UnsupportedFeatureError(
                f"inline REFERENCES is not supported; use a table-level FOREIGN KEY clause "
                f"(line {tok.line}, column {tok.column})"
            )
        elif tok.text in _REJECTED_WORDS:
            raise UnsupportedFeatureError(
                f"{_REJECTED_WORDS[tok.text]} are not supported (line {tok.line}, column {tok.column})"
            )
        else:
            raise p.fail("',' or ')'")
    return ColumnDef(name, col_type, nullable), is_pk


def _parse_type(p: _Parser) -> ColumnType:
    tok = p.peek()
    if tok.kind != "ident":
        raise p.fail("a data type")
    word = tok.text
    if word not in _TYPE_WORDS:
        raise UnsupportedFeatureError(
            f"data type {tok.text.upper()!r} is outside the supported subset "
            f"(line {tok.line}, column {tok.column})"
        )
    p.advance()
    if word == "decimal":
        p.expect_punct("(")
        precision = p.number()
        p.expect_punct(",")
        scale = p.number()
        p.expect_punct(")")
        if scale > precision or precision <= 0:
            raise DdlSyntaxError(f"invalid DECIMAL({precision},{scale})", tok.line, tok.column)
        return ColumnType("DECIMAL", precision=precision, scale=scale)
    if word == "varchar":
        p.expect_punct("(")
        length = p.number()
        p.expect_punct(")")
        if length <= 0:
            raise DdlSyntaxError(f"invalid VARCHAR({length})", tok.line, tok.column)
        return ColumnType("VARCHAR", length=length)
    return ColumnType(word.upper())


def _parse_table_pk(p: _Parser) -> tuple[str, ...]:
    p.expect_keyword("primary")
    p.expect_keyword("key")
    return _parse_name_list(p, "a primary key column")


def _parse_table_fk(p: _Parser) -> FkDef:
    p.expect_keyword("foreign")
    p.expect_keyword("key")
    local = _parse_name_list(p, "a foreign key column")
    p.expect_keyword("references")
    ref_table = p.identifier("a referenced table name")
    remote = _parse_name_list(p, "a referenced column")
    return FkDef(columns=local, ref_table=ref_table, ref_columns=remote)


def _parse_name_list(p: _Parser, what: str) -> tuple[str, ...]:
    p.expect_punct("(")
    names = [p.identifier(what)]
    while True:
        tok = p.peek()
        if tok.kind == "punct" and tok.text == ",":
            p.advance()
            names.append(p.identifier(what))
            continue
        p.expect_punct(")")
        return tuple(names)
