"""Recursive-descent parser for the formula grammar.

Precedence, loosest first: ``forall v. f`` / ``exists v. f``, ``->``
(right associative), ``|``, ``&``, ``!``, atoms. Atoms are ``R(t, ...)``,
``t = u``, ``t != u``, ``true``, ``false``. A term is a variable or
``eps v. (formula)``.
"""

import re
import warnings

from .ast import FALSE, TRUE, And, Atom, Eps, Eq, Exists, Forall, Implies, Not, Or

_TOKEN = re.compile(r"\s*(?:(->|!=|[()=,.|&!])|([A-Za-z_][A-Za-z0-9_']*)|(\S))")
KEYWORDS = {"forall", "exists", "eps", "true", "false"}


class FormulaSyntaxError(ValueError):
    pass


class ShadowWarning(UserWarning):
    pass


def _tokenize(text):
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(3):
            raise FormulaSyntaxError(f"unexpected character {m.group(3)!r} at {m.start(3)}")
        out.append((m.group(1) or m.group(2), m.start()))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text, vocab, allow_eps):
        self.toks = _tokenize(text)
        self.i = 0
        self.vocab = vocab
        self.allow_eps = allow_eps
        self.bound = []

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j][0] if j < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError(f"unexpected end of input (expected {expected or 'more'})")
        if expected is not None and tok != expected:
            raise FormulaSyntaxError(f"expected {expected!r} but found {tok!r} at {self.toks[self.i][1]}")
        self.i += 1
        return tok

    def ident(self):
        tok = self.take()
        if not re.match(r"[A-Za-z_]", tok) or tok in KEYWORDS:
            raise FormulaSyntaxError(f"expected identifier, found {tok!r}")
        return tok

    def parse(self):
        f = self.formula()
        if self.peek() is not None:
            raise FormulaSyntaxError(f"trailing input at {self.toks[self.i][1]}: {self.peek()!r}")
        return f

    def formula(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def disjunction(self):
        args = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            args.append(self.conjunction())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conjunction(self):
        args = [self.unary()]
        while self.peek() == "&":
            self.take()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("forall", "exists"):
            self.take()
            names = [self.ident()]
            while self.peek() not in (".", None):
                self.take(",") if self.peek() == "," else None
                names.append(self.ident())
            self.take(".")
            for v in names:
                if v in self.bound:
                    warnings.warn(f"variable {v} shadows an enclosing binder", ShadowWarning, stacklevel=4)
            self.bound.extend(names)
            body = self.formula()
            del self.bound[-len(names):]
            cls = Forall if tok == "forall" else Exists
            for v in reversed(names):
                body = cls(v, body)
            return body
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if tok not in KEYWORDS and self.peek(1) == "(" and tok is not None and re.match(r"[A-Za-z_]", tok):
            return self.relation_atom()
        left = self.term()
        op = self.take()
        if op not in ("=", "!="):
            raise FormulaSyntaxError(f"expected '=' or '!=' after term, found {op!r}")
        right = self.term()
        return Eq(left, right) if op == "=" else Not(Eq(left, right))

    def relation_atom(self):
        name = self.ident()
        self.take("(")
        args = []
        if self.peek() != ")":
            args.append(self.term())
            while self.peek() == ",":
                self.take()
                args.append(self.term())
        self.take(")")
        if self.vocab is not None:
            if name not in self.vocab:
                raise FormulaSyntaxError(f"unknown relation {name}")
            if self.vocab.arity(name) != len(args):
                raise FormulaSyntaxError(
                    f"arity mismatch: {name} has arity {self.vocab.arity(name)}, used with {len(args)}")
        return Atom(name, tuple(args))

    def term(self):
        if self.peek() == "eps":
            if not self.allow_eps:
                raise FormulaSyntaxError("epsilon terms are not allowed here")
            self.take()
            var = self.ident()
            self.take(".")
            self.take("(")
            self.bound.append(var)
            body = self.formula()
            self.bound.pop()
            self.take(")")
            return Eps(var, body)
        return self.ident()


def parse_formula(text: str, vocab=None, allow_eps: bool = True):
    """Parse ``text``; with ``vocab``, relation names and arities are checked."""
    return _Parser(text, vocab, allow_eps).parse()
