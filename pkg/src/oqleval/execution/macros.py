"""Expansion of Overpass Turbo macros into plain OverpassQL."""

import logging
from typing import Dict, List

from oqleval.core.lexer import TokenKind, tokenize
from oqleval.core.nodes import MacroKind, TurboMacro, parse_macro
from oqleval.errors import MacroError
from oqleval.execution.config import ExecutionConfig
from oqleval.execution.geocode import GeocodeResolver, GeocodeResult
from oqleval.utils.constants import AREA_ID_OFFSET_RELATION, AREA_ID_OFFSET_WAY

logger = logging.getLogger(__name__)

CENTER_MACRO = "center"
_MAX_SHORTCUT_DEPTH = 8


class MacroExpander:
    """Replaces macro tokens; every other token is copied verbatim."""

    def __init__(self, cfg: ExecutionConfig, resolver: GeocodeResolver) -> None:
        self.cfg = cfg
        self.resolver = resolver
        self.logger = logging.getLogger(__name__)

    def expand(self, text: str) -> str:
        shortcuts = self._shortcuts(text)
        return self._expand(text, shortcuts, 0)

    def _shortcuts(self, text: str) -> Dict[str, str]:
        shortcuts: Dict[str, str] = {}
        for token in tokenize(text):
            if token.kind is TokenKind.MACRO:
                macro = parse_macro(token.lexeme)
                if macro.is_definition and macro.argument is not None:
                    shortcuts[macro.name] = macro.argument
        return shortcuts

    def _expand(self, text: str, shortcuts: Dict[str, str], depth: int) -> str:
        if depth > _MAX_SHORTCUT_DEPTH:
            raise MacroError("Shortcut definitions nest too deeply")
        parts: List[str] = []
        for token in tokenize(text):
            if token.kind is not TokenKind.MACRO:
                parts.append(token.lexeme)
                continue
            try:
                macro = parse_macro(token.lexeme)
            except ValueError as e:
                raise MacroError(str(e)) from e
            if macro.is_directive:
                continue
            parts.append(self._replacement(macro, shortcuts, depth))
        return "".join(parts)

    def _replacement(
        self, macro: TurboMacro, shortcuts: Dict[str, str], depth: int
    ) -> str:
        south, west, north, east = self.cfg.default_bbox

        if macro.kind is MacroKind.BBOX:
            return f"{south},{west},{north},{east}"

        if macro.kind is MacroKind.GEOCODE_AREA:
            found = self._resolve(macro)
            if found.kind == "relation":
                return f"area({AREA_ID_OFFSET_RELATION + found.id})"
            if found.kind == "way":
                return f"area({AREA_ID_OFFSET_WAY + found.id})"
            raise MacroError(
                f"{macro.argument!r} resolves to a node, which has no area"
            )

        if macro.kind is MacroKind.GEOCODE_ID:
            found = self._resolve(macro)
            return f"{found.kind}({found.id})"

        if macro.kind is MacroKind.GEOCODE_COORDS:
            found = self._resolve(macro)
            return f"{found.lat},{found.lon}"

        if macro.name in shortcuts and macro.argument is None:
            return self._expand(shortcuts[macro.name], shortcuts, depth + 1)

        if macro.name == CENTER_MACRO:
            return f"{(south + north) / 2},{(west + east) / 2}"

        raise MacroError(f"Unknown Turbo macro {{{{{macro.name}}}}}")

    def _resolve(self, macro: TurboMacro) -> GeocodeResult:
        if not macro.argument:
            raise MacroError(f"{macro.name} macro needs a place name")
        found = self.resolver.resolve(macro.argument)
        if found is None:
            raise MacroError(f"Geocoding found nothing for {macro.argument!r}")
        self.logger.debug(f"Geocoded {macro.argument!r} to {found.kind} {found.id}")
        return found


def expand_macros(text: str, cfg: ExecutionConfig, resolver: GeocodeResolver) -> str:
    """
    Expand Turbo macros into executable OverpassQL.

    Text without macros is returned unchanged.

    Raises:
        MacroError: unknown macro or failed geocoding
        LexError: the text cannot be tokenized
    """
    return MacroExpander(cfg, resolver).expand(text)
