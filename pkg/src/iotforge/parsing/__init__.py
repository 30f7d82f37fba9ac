from .architecture import parse_architecture
from .base import parse_expr
from .deployment import parse_deployment
from .domain import parse_domain
from .lexer import Token, TokenKind, tokenize
from .rules import parse_logic_rules
from .userinteraction import parse_userinteraction

__all__ = [
    "Token",
    "TokenKind",
    "parse_architecture",
    "parse_deployment",
    "parse_domain",
    "parse_expr",
    "parse_logic_rules",
    "parse_userinteraction",
    "tokenize",
]
