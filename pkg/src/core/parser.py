"""
Parsers for expression text and ``.lag`` system files.

Expression grammar:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' ['-'] integer)?
    base   := rational | ident | ident "'"* '(' expr ')' | '(' expr ')' | '-' factor
"""

import re
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional

import sympy as sp

from . import kernel
from .exceptions import InputError, ParseError, UnknownIdentifier, ZeroDivisionInExpression
from .models import LagrangianSpec, VarTable
from ..utils.logger import get_logger

logger = get_logger(__name__)


class Token(NamedTuple):
    kind: str
    text: str
    position: int


TOKEN_PATTERN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()'])|(?P<bad>\S))"
)


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = TOKEN_PATTERN.match(text, position)
        if not match or match.end() == position:
            break
        kind = match.lastgroup
        if kind == "bad":
            raise ParseError(f"Unexpected character '{match.group(kind)}'", position=match.start(kind), text=text)
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class ExpressionParser:
    """Recursive-descent parser producing sympy expressions over a VarTable."""

    def __init__(self, text: str, vars: VarTable):
        self.text = text
        self.vars = vars
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            found = self.current.text or "end of input"
            raise ParseError(f"Expected '{text}', found '{found}'", position=self.current.position, text=self.text)
        return self.advance()

    def parse(self) -> sp.Expr:
        if self.current.kind == "end":
            raise ParseError("Empty expression", position=0, text=self.text)
        result = self.expr()
        if self.current.kind != "end":
            raise ParseError(f"Unexpected '{self.current.text}'", position=self.current.position, text=self.text)
        return result

    def expr(self) -> sp.Expr:
        result = self.term()
        while self.current.text in ("+", "-"):
            op = self.advance().text
            right = self.term()
            result = result + right if op == "+" else result - right
        return result

    def term(self) -> sp.Expr:
        result = self.factor()
        while self.current.text in ("*", "/"):
            op = self.advance()
            right = self.factor()
            if op.text == "*":
                result = result * right
            else:
                if right == 0:
                    raise ZeroDivisionInExpression(f"Division by zero at position {op.position}")
                result = result / right
        return result

    def factor(self) -> sp.Expr:
        base = self.base()
        if self.current.text != "^":
            return base
        self.advance()
        sign = 1
        if self.current.text == "-":
            self.advance()
            sign = -1
        token = self.current
        if token.kind != "number" or "." in token.text:
            raise ParseError("Exponent must be an integer", position=token.position, text=self.text)
        self.advance()
        exponent = sign * int(token.text)
        if base == 0 and exponent < 0:
            raise ZeroDivisionInExpression(f"Negative power of zero at position {token.position}")
        return base ** exponent

    def base(self) -> sp.Expr:
        token = self.current
        if token.text == "-":
            self.advance()
            return -self.factor()
        if token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if token.kind == "number":
            self.advance()
            return sp.Rational(token.text)
        if token.kind == "ident":
            self.advance()
            return self.identifier(token)
        found = token.text or "end of input"
        raise ParseError(f"Unexpected '{found}'", position=token.position, text=self.text)

    def identifier(self, token: Token) -> sp.Expr:
        name = token.text
        primes = 0
        while self.current.text == "'":
            self.advance()
            primes += 1

        if self.current.text == "(":
            if name == "exp" and primes == 0:
                self.advance()
                argument = self.expr()
                self.expect(")")
                if argument.atoms(sp.Function) or not argument.is_polynomial():
                    raise ParseError("exp argument must be a polynomial", position=token.position, text=self.text)
                return sp.exp(argument)
            if name in self.vars.functions:
                self.advance()
                argument = self.expr()
                self.expect(")")
                if kernel.opaque_atoms(argument):
                    raise ParseError(
                        f"Argument of {name} must not apply an opaque function",
                        position=token.position, text=self.text,
                    )
                return kernel.normalize(kernel.opaque_derivative(sp.Function(name), primes, argument))
            raise UnknownIdentifier(name, position=token.position)

        if primes:
            raise ParseError(f"Prime on non-function '{name}'", position=token.position, text=self.text)
        if name in self.vars.functions or name == "exp":
            raise ParseError(f"Function '{name}' needs an argument", position=token.position, text=self.text)
        symbol = self.vars.lookup(name)
        if symbol is None:
            raise UnknownIdentifier(name, position=token.position)
        return symbol


def parse_expression(text: str, vars: VarTable) -> sp.Expr:
    """Parse expression text against the declared names."""
    return ExpressionParser(text, vars).parse()


def parse_rational(text: str, field: str = "value") -> sp.Rational:
    """Parse an exact rational literal such as ``-1/2`` or ``0.25``."""
    try:
        value = parse_expression(text, VarTable(dim=1))
    except ParseError as exc:
        raise InputError(f"Invalid rational '{text}': {exc.message}", field=field) from exc
    if not value.is_Rational:
        raise InputError(f"'{text}' is not a rational literal", field=field)
    return value


# System files

SYSTEM_LINE = re.compile(r'^system\s+"(?P<name>[^"]*)"$')
DIM_LINE = re.compile(r"^dim\s+(?P<dim>\d+)$")
PARAM_LINE = re.compile(r"^param\s+(?P<name>[A-Za-z][A-Za-z0-9_]*)(?:\s*=\s*(?P<value>.+))?$")
FUNCTION_LINE = re.compile(r"^function\s+(?P<name>[A-Za-z][A-Za-z0-9_]*)$")
LAGRANGIAN_LINE = re.compile(r"^lagrangian\s*=\s*(?P<expr>.+)$")


def parse_system(
    text: str,
    overrides: Optional[Dict[str, sp.Rational]] = None,
    source: Optional[str] = None,
) -> LagrangianSpec:
    """Parse the text of a system file into a LagrangianSpec."""
    where = source or "<input>"
    name = None
    dim = None
    parameters: Dict[str, Optional[sp.Rational]] = {}
    functions: List[str] = []
    lagrangian_text = None
    lagrangian_line = 0

    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if match := SYSTEM_LINE.match(line):
            name = match.group("name")
        elif match := DIM_LINE.match(line):
            dim = int(match.group("dim"))
        elif match := PARAM_LINE.match(line):
            value = match.group("value")
            parameters[match.group("name")] = (
                parse_rational(value.strip(), field=match.group("name")) if value else None
            )
        elif match := FUNCTION_LINE.match(line):
            functions.append(match.group("name"))
        elif match := LAGRANGIAN_LINE.match(line):
            lagrangian_text = match.group("expr")
            lagrangian_line = number
        else:
            raise ParseError(f"{where}:{number}: unrecognized line '{line}'")

    if name is None:
        raise InputError(f"{where}: missing 'system' line", field="system")
    if dim is None or dim < 1:
        raise InputError(f"{where}: missing or invalid 'dim' line", field="dim")
    if lagrangian_text is None:
        raise InputError(f"{where}: missing 'lagrangian' line", field="lagrangian")

    for key, value in (overrides or {}).items():
        if key not in parameters:
            raise InputError(f"{where}: --set names undeclared parameter '{key}'", field=key)
        parameters[key] = value

    vars = VarTable(dim=dim, parameters=list(parameters), functions=functions)
    try:
        expression = parse_expression(lagrangian_text, vars)
    except ParseError as exc:
        exc.message = f"{where}:{lagrangian_line}: {exc.message}"
        exc.args = (exc.message,)
        raise

    assigned = {sp.Symbol(k): val for k, val in parameters.items() if val is not None}
    if assigned:
        expression = expression.xreplace(assigned)
    expression = kernel.normalize(expression)

    logger.debug(f"Parsed system '{name}' from {where}: dim={dim}, parameters={list(parameters)}")
    return LagrangianSpec(
        name=name,
        vars=vars,
        lagrangian=expression,
        parameter_values=parameters,
        source=source,
    )


def load_system(path: str, overrides: Optional[Dict[str, sp.Rational]] = None) -> LagrangianSpec:
    """Read and parse a system file."""
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror or exc})", field="file") from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not valid UTF-8 (byte {exc.start})", field="file") from exc
    return parse_system(text, overrides=overrides, source=str(path))

