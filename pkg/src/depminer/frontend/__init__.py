"""Pluggable language front-ends."""
from .base import (
    CLASSIFY_DECLARATION,
    CLASSIFY_OTHER,
    CLASSIFY_USAGE,
    FrontEnd,
    FrontEndDescriptor,
    FrontEndRegistry,
    ImportBinding,
    ParseResult,
    RegistryError,
    SyntaxNode,
    classify,
    enclosing_unit,
    extract_identifier,
)
from .java_frontend import JavaFrontEnd
from .python_frontend import PythonFrontEnd


def default_registry() -> FrontEndRegistry:
    """Registry with the two bundled front-ends."""
    return FrontEndRegistry([PythonFrontEnd(), JavaFrontEnd()])


__all__ = [
    "CLASSIFY_DECLARATION",
    "CLASSIFY_OTHER",
    "CLASSIFY_USAGE",
    "FrontEnd",
    "FrontEndDescriptor",
    "FrontEndRegistry",
    "ImportBinding",
    "ParseResult",
    "RegistryError",
    "SyntaxNode",
    "classify",
    "default_registry",
    "enclosing_unit",
    "extract_identifier",
    "JavaFrontEnd",
    "PythonFrontEnd",
]
