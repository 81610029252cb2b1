"""Parser for the textual policy form.

Grammar sketch (newlines are plain whitespace, ``#`` starts a comment):

    policy  := branch*
    branch  := ("if" | "elif") pred ":" "return" IDENT
    pred    := conj ("||" conj)*
    conj    := atom ("&&" atom)*
    atom    := "true" | "false" | "(" pred ")"
             | "start" "==" IDENT
             | expr (">" | "<") param
    param   := "?"? IDENT dims ("=" number)?
    dims    := "[" int "," int "," int "]"
    expr    := term (("+" | "-") term)*
    term    := postfix (("*" | "/") postfix)*
    postfix := primary (".x" | ".y")*
    primary := number dims? | "(" number "," number ")" dims?
             | IDENT "(" expr ("," expr)? ")" | IDENT | "(" expr ")"

``&&`` binds tighter than ``||``; both associate left.  A parameter
without ``= value`` parses as a blank.  The parsed policy is type checked
before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    START,
    ActionEq,
    And,
    Binary,
    BlankPred,
    Branch,
    Const,
    Expr,
    FalseP,
    Gt,
    InputVar,
    Lt,
    Or,
    Param,
    Policy,
    Predicate,
    TrueP,
    Unary,
)
from .dims import DIMENSIONLESS, AspType, Dimension, Kind, scalar, vector
from .domain import DomainDefinition
from .errors import ParseError, UnknownVariable
from .typecheck import typecheck_policy

_KEYWORDS = {"if", "elif", "return", "start", "true", "false"}
_PUNCT = ("==", "&&", "||", "(", ")", "[", "]", ",", ":", ">", "<", "=", "+", "-", "*", "/", "?", ".")


class _Reparse(Exception):
    """Internal signal: the parenthesized text was an expression, not a predicate."""


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | NUMBER | punctuation literal | EOF
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
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
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    # a dot not followed by a digit is the accessor, not a fraction
                    if j + 1 >= n or not text[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            word = text[i:j]
            tokens.append(Token("NUMBER", word, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(Token(word if word in _KEYWORDS else "IDENT", word, line, start_col))
            col += j - i
            i = j
            continue
        two = text[i : i + 2]
        if two in ("==", "&&", "||"):
            tokens.append(Token(two, two, line, start_col))
            i += 2
            col += 2
            continue
        if ch in "()[]:,><=+-*/?.":
            tokens.append(Token(ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], dom: DomainDefinition):
        self.tokens = tokens
        self.pos = 0
        self.dom = dom

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return self.next()

    def error(self, msg: str) -> ParseError:
        tok = self.peek()
        return ParseError(msg, tok.line, tok.col)

    # --- policy -----------------------------------------------------------

    def policy(self) -> Policy:
        branches: list[Branch] = []
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind not in ("if", "elif"):
                raise self.error(f"expected a branch, found {tok.text!r}")
            self.next()
            guard = self.pred()
            self.expect(":")
            self.expect("return")
            action = self.expect("IDENT").text
            branches.append(Branch(guard, action))
        return Policy(tuple(branches))

    # --- predicates -------------------------------------------------------

    def pred(self) -> Predicate:
        node = self.conj()
        while self.peek().kind == "||":
            self.next()
            node = Or(node, self.conj())
        return node

    def conj(self) -> Predicate:
        node = self.atom()
        while self.peek().kind == "&&":
            self.next()
            node = And(node, self.atom())
        return node

    def atom(self) -> Predicate:
        tok = self.peek()
        if tok.kind == "true":
            self.next()
            return TrueP()
        if tok.kind == "false":
            self.next()
            return FalseP()
        if tok.kind == "?":
            # '?name [..]' only appears on a comparison's right side, so a '?'
            # in atom position is always a blank predicate
            self.next()
            return BlankPred()
        if tok.kind == "start":
            self.next()
            self.expect("==")
            rhs = self.expect("IDENT").text
            return ActionEq(START, rhs)
        if tok.kind == "(":
            # parenthesized predicate or a comparison whose lhs is parenthesized
            save = self.pos
            try:
                self.next()
                inner = self.pred()
                self.expect(")")
                if self.peek().kind in (">", "<"):
                    raise _Reparse()
                return inner
            except _Reparse:
                self.pos = save
                return self.comparison()
            except ParseError as first:
                self.pos = save
                try:
                    return self.comparison()
                except ParseError as second:
                    # report whichever attempt progressed further
                    if (first.line, first.col) >= (second.line, second.col):
                        raise first from None
                    raise second from None
        return self.comparison()

    def comparison(self) -> Predicate:
        expr = self.expr()
        tok = self.peek()
        if tok.kind not in (">", "<"):
            raise self.error("expected '>' or '<' after expression")
        self.next()
        param = self.param()
        return Gt(expr, param) if tok.kind == ">" else Lt(expr, param)

    def param(self) -> Param:
        blank_mark = False
        if self.peek().kind == "?":
            self.next()
            blank_mark = True
        name = self.expect("IDENT").text
        dim = self.dims()
        if self.peek().kind == "=":
            if blank_mark:
                raise self.error("blank parameter cannot carry a value")
            self.next()
            value = self.number()
            return Param(name, dim, value)
        return Param(name, dim, None, blank=True)

    def dims(self) -> Dimension:
        self.expect("[")
        l = self.int_()
        self.expect(",")
        t = self.int_()
        self.expect(",")
        m = self.int_()
        self.expect("]")
        return Dimension(l, t, m)

    def int_(self) -> int:
        neg = False
        if self.peek().kind == "-":
            self.next()
            neg = True
        tok = self.expect("NUMBER")
        try:
            value = int(tok.text)
        except ValueError:
            raise ParseError(f"expected an integer, found {tok.text!r}", tok.line, tok.col)
        return -value if neg else value

    def number(self) -> float:
        neg = False
        if self.peek().kind == "-":
            self.next()
            neg = True
        tok = self.expect("NUMBER")
        value = float(tok.text)
        return -value if neg else value

    # --- expressions ------------------------------------------------------

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.postfix()
        while self.peek().kind in ("*", "/"):
            op = self.next().kind
            node = Binary(op, node, self.postfix())
        return node

    def postfix(self) -> Expr:
        node = self.primary()
        while self.peek().kind == ".":
            self.next()
            comp = self.expect("IDENT")
            if comp.text not in ("x", "y"):
                raise ParseError(f"expected '.x' or '.y', found .{comp.text}", comp.line, comp.col)
            node = Unary("v_x" if comp.text == "x" else "v_y", node)
        return node

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER" or (tok.kind == "-" and self.peek(1).kind == "NUMBER"):
            value = self.number()
            dim = self.opt_dims()
            return Const(value, scalar(dim))
        if tok.kind == "(":
            save = self.pos
            self.next()
            if self._vector_ahead():
                x = self.number()
                self.expect(",")
                y = self.number()
                self.expect(")")
                dim = self.opt_dims()
                return Const((x, y), vector(dim))
            self.pos = save
            self.next()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "IDENT":
            name = self.next().text
            if self.peek().kind == "(":
                self.next()
                args = [self.expr()]
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                if len(args) == 1:
                    return Unary(name, args[0])
                if len(args) == 2:
                    return Binary(name, args[0], args[1])
                raise ParseError(f"{name} cannot take {len(args)} arguments", tok.line, tok.col)
            declared = self.dom.input_type(name)
            if declared is None:
                raise UnknownVariable(name)
            return InputVar(name, declared)
        raise self.error(f"expected an expression, found {tok.text or 'end of input'!r}")

    def _vector_ahead(self) -> bool:
        tok = self.peek()
        if tok.kind == "-":
            tok2 = self.peek(1)
            return tok2.kind == "NUMBER" and self.peek(2).kind == ","
        return tok.kind == "NUMBER" and self.peek(1).kind == ","

    def opt_dims(self) -> Dimension:
        if self.peek().kind == "[":
            return self.dims()
        return DIMENSIONLESS


def parse_policy(text: str, dom: DomainDefinition) -> Policy:
    """Parse and type check a policy; raises ParseError or a type error."""
    parser = _Parser(_tokenize(text), dom)
    policy = parser.policy()
    typecheck_policy(policy, dom)
    return policy


def parse_predicate(text: str, dom: DomainDefinition) -> Predicate:
    """Parse a bare predicate (used by tests and tools)."""
    parser = _Parser(_tokenize(text), dom)
    node = parser.pred()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return node


def load_policy(path, dom: DomainDefinition) -> Policy:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_policy(fh.read(), dom)


def save_policy(policy: Policy, path) -> None:
    from .printer import print_policy

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(print_policy(policy))
