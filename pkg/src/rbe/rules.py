"""Boolean rule DSL: parsing, canonical printing, and evaluation over text.

Grammar (OR binds loosest, then AND, then NOT):

    expr    := or_expr
    or_expr := and_expr ("OR" and_expr)*
    and_expr:= unary ("AND" unary)*
    unary   := "NOT" unary | atom | "(" expr ")"
    atom    := contains("<1-3 words>") | regex("<pattern>")

Rules are immutable after parse and evaluation is pure, so a parsed
ruleset can be applied to documents concurrently.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Union

from .errors import RuleSyntaxError, ValidationError
from .textutil import normalize, words

PROVENANCES = ("manual", "induced", "imported")


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Contains:
    ngram: tuple[str, ...]  # 1 to 3 lowercase words


@dataclass(frozen=True)
class Regex:
    pattern: str


@dataclass(frozen=True)
class And:
    children: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["Expr", ...]


@dataclass(frozen=True)
class Not:
    child: "Expr"


Expr = Union[Contains, Regex, And, Or, Not]


def normalize_expr(expr: Expr) -> Expr:
    """Flatten nested AND/OR chains and cancel double negation."""
    if isinstance(expr, Not):
        child = normalize_expr(expr.child)
        if isinstance(child, Not):
            return child.child
        return Not(child)
    if isinstance(expr, (And, Or)):
        cls = type(expr)
        flat: list[Expr] = []
        for c in expr.children:
            c = normalize_expr(c)
            if isinstance(c, cls):
                flat.extend(c.children)
            else:
                flat.append(c)
        if len(flat) == 1:
            return flat[0]
        return cls(tuple(flat))
    return expr


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> RuleSyntaxError:
        return RuleSyntaxError(message, self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek_word(self) -> Optional[str]:
        self.skip_ws()
        m = re.match(r"[A-Za-z_]+", self.text[self.pos:])
        return m.group(0) if m else None

    def eat_word(self, word: str) -> bool:
        if self.peek_word() == word:
            self.pos += len(word)
            return True
        return False

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def parse_string(self) -> str:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != '"':
            raise self.error("expected string literal")
        self.pos += 1
        out: list[str] = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise self.error("dangling escape")
                out.append(self.text[self.pos + 1])
                self.pos += 2
            elif ch == '"':
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1
        raise self.error("unterminated string literal")

    def parse_expr(self) -> Expr:
        terms = [self.parse_and()]
        while self.eat_word("OR"):
            terms.append(self.parse_and())
        return terms[0] if len(terms) == 1 else Or(tuple(terms))

    def parse_and(self) -> Expr:
        terms = [self.parse_unary()]
        while self.eat_word("AND"):
            terms.append(self.parse_unary())
        return terms[0] if len(terms) == 1 else And(tuple(terms))

    def parse_unary(self) -> Expr:
        if self.eat_word("NOT"):
            return Not(self.parse_unary())
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == "(":
            self.pos += 1
            inner = self.parse_expr()
            self.expect(")")
            return inner
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        word = self.peek_word()
        if word == "contains":
            self.pos += len("contains")
            self.expect("(")
            start = self.pos
            raw = self.parse_string()
            ngram = tuple(words(raw))
            if not 1 <= len(ngram) <= 3:
                self.pos = start
                raise self.error("contains() takes 1 to 3 words")
            self.expect(")")
            return Contains(ngram)
        if word == "regex":
            self.pos += len("regex")
            self.expect("(")
            start = self.pos
            pattern = self.parse_string()
            try:
                re.compile(pattern)
            except re.error as exc:
                self.pos = start
                raise self.error(f"unsupported regex: {exc}") from exc
            self.expect(")")
            return Regex(pattern)
        raise self.error("expected contains(...), regex(...), NOT, or '('")


def parse_expr(spec: str) -> Expr:
    """Parse a DSL expression into a normalized AST."""
    if not spec.strip():
        raise RuleSyntaxError("empty rule", 0)
    parser = _Parser(spec)
    expr = parser.parse_expr()
    parser.skip_ws()
    if parser.pos != len(spec):
        raise parser.error("trailing input")
    return normalize_expr(expr)


def to_dsl(expr: Expr) -> str:
    """Canonical printing; print(parse(s)) re-parses to the identical AST."""
    if isinstance(expr, Contains):
        return f'contains("{" ".join(expr.ngram)}")'
    if isinstance(expr, Regex):
        escaped = expr.pattern.replace("\\", "\\\\").replace('"', '\\"')
        return f'regex("{escaped}")'
    if isinstance(expr, Not):
        child = to_dsl(expr.child)
        if isinstance(expr.child, (And, Or)):
            child = f"({child})"
        return f"NOT {child}"
    if isinstance(expr, And):
        parts = [
            f"({to_dsl(c)})" if isinstance(c, Or) else to_dsl(c)
            for c in expr.children
        ]
        return " AND ".join(parts)
    if isinstance(expr, Or):
        return " OR ".join(to_dsl(c) for c in expr.children)
    raise TypeError(f"not an expression: {expr!r}")


# --------------------------------------------------------------------------
# Evaluation


@lru_cache(maxsize=4096)
def _compiled(pattern: str) -> re.Pattern:
    return re.compile(pattern)


def _contains_ngram(tokens: tuple[str, ...], ngram: tuple[str, ...]) -> bool:
    n = len(ngram)
    return any(tokens[i:i + n] == ngram for i in range(len(tokens) - n + 1))


def eval_expr(expr: Expr, tokens: tuple[str, ...], raw: str) -> bool:
    if isinstance(expr, Contains):
        return _contains_ngram(tokens, expr.ngram)
    if isinstance(expr, Regex):
        return _compiled(expr.pattern).search(raw) is not None
    if isinstance(expr, And):
        return all(eval_expr(c, tokens, raw) for c in expr.children)
    if isinstance(expr, Or):
        return any(eval_expr(c, tokens, raw) for c in expr.children)
    if isinstance(expr, Not):
        return not eval_expr(expr.child, tokens, raw)
    raise TypeError(f"not an expression: {expr!r}")


# --------------------------------------------------------------------------
# Rules and rulesets


@dataclass
class Rule:
    id: str
    expr: Expr
    provenance: str = "manual"
    exemplar_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValidationError(
                f"rule {self.id!r}: bad provenance {self.provenance!r}"
            )

    def fires(self, text: str) -> bool:
        return eval_expr(self.expr, tuple(words(text)), normalize(text))


def parse_rule(rule_id: str, spec: str, provenance: str = "manual") -> Rule:
    return Rule(id=rule_id, expr=parse_expr(spec), provenance=provenance)


@dataclass
class Ruleset:
    rules: list[Rule]

    def __post_init__(self):
        seen: set[str] = set()
        for r in self.rules:
            if r.id in seen:
                raise ValidationError(f"duplicate rule id {r.id!r}")
            seen.add(r.id)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def get(self, rule_id: str) -> Optional[Rule]:
        for r in self.rules:
            if r.id == rule_id:
                return r
        return None


@dataclass
class CoverSet:
    rule_id: str
    doc_ids: list[str]  # sorted ascending
    label_agreement: Optional[float] = None


def apply_ruleset(rs: Ruleset, docs: Iterable) -> tuple[list[CoverSet], dict[str, list[str]]]:
    """Cover set per rule plus, per document, the fired rule ids in ruleset order.

    Documents where no rule fires map to an empty list.
    """
    docs = list(docs)
    fired: dict[str, list[str]] = {d.id: [] for d in docs}
    covers: list[CoverSet] = []
    for rule in rs:
        covered: list[str] = []
        agree = 0
        labeled = 0
        for d in docs:
            if rule.fires(d.text):
                covered.append(d.id)
                fired[d.id].append(rule.id)
                if d.label is not None:
                    labeled += 1
                    agree += int(d.label == 1)
        covers.append(
            CoverSet(
                rule_id=rule.id,
                doc_ids=sorted(covered),
                label_agreement=(agree / labeled) if labeled else None,
            )
        )
    return covers, fired


def weak_label(rs: Ruleset, docs: Iterable) -> dict[str, Optional[int]]:
    """1 where at least one rule fires, None (abstain) otherwise."""
    _, fired = apply_ruleset(rs, docs)
    return {doc_id: (1 if rule_ids else None) for doc_id, rule_ids in fired.items()}


# --------------------------------------------------------------------------
# Persistence: JSONL, one object per rule


def load_ruleset(path) -> Ruleset:
    rules: list[Rule] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            try:
                rule = Rule(
                    id=obj["id"],
                    expr=parse_expr(obj["expr"]),
                    provenance=obj.get("provenance", "manual"),
                    exemplar_ids=list(obj.get("exemplar_ids", [])),
                )
            except KeyError as exc:
                raise ValidationError(f"{path}:{lineno}: missing field {exc}") from exc
            except RuleSyntaxError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            rules.append(rule)
    return Ruleset(rules)


def save_ruleset(rs: Ruleset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rs:
            fh.write(json.dumps({
                "id": r.id,
                "expr": to_dsl(r.expr),
                "provenance": r.provenance,
                "exemplar_ids": r.exemplar_ids,
            }, sort_keys=True) + "\n")
