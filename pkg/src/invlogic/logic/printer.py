from .ast import And, Atom, Const, Eq, Exists, Forall, Implies, Not, Or

_QUANT, _IMP, _OR, _AND, _NOT, _ATOM = range(6)


def term_text(t) -> str:
    if isinstance(t, str):
        return t
    return f"eps {t.var}. ({to_text(t.body)})"


def to_text(f, level: int = 0) -> str:
    """Render ``f`` in the concrete grammar accepted by :func:`parse_formula`."""
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f"{f.rel}({', '.join(term_text(t) for t in f.args)})"
    if isinstance(f, Eq):
        return f"{term_text(f.left)} = {term_text(f.right)}"
    if isinstance(f, Not):
        if isinstance(f.arg, Eq):
            return f"{term_text(f.arg.left)} != {term_text(f.arg.right)}"
        return "!" + to_text(f.arg, _NOT)
    if isinstance(f, (Exists, Forall)):
        kw = "exists" if isinstance(f, Exists) else "forall"
        text = f"{kw} {f.var}. {to_text(f.body, _QUANT)}"
        return text if level == _QUANT else f"({text})"
    if isinstance(f, Implies):
        text = f"{to_text(f.left, _OR)} -> {to_text(f.right, _IMP)}"
        return text if level <= _IMP else f"({text})"
    if isinstance(f, (And, Or)):
        prec, sep = (_AND, " & ") if isinstance(f, And) else (_OR, " | ")
        if not f.args:
            return "true" if isinstance(f, And) else "false"
        text = sep.join(to_text(a, prec + 1) for a in f.args)
        return text if level <= prec and len(f.args) > 1 else f"({text})"
    raise TypeError(f"not a formula: {f!r}")
