"""Verb-noun command grammar for the text worlds.

Case-insensitive, articles stripped, with a small synonym table.  Every
Action's canonical_text round-trips through parse_command back to the same
Action.
"""

from __future__ import annotations

from enum import Enum

from .world import Action, ActionKind, Direction, INVENTORY, LOOK


class ParseErrorKind(str, Enum):
    UNKNOWN_VERB = "unknown-verb"
    UNKNOWN_OBJECT = "unknown-object"
    EMPTY = "empty"


class ParseError(Exception):
    def __init__(self, kind: ParseErrorKind, token: str):
        super().__init__(f"{kind.value}: {token!r}")
        self.kind = kind
        self.token = token


ARTICLES = {"the", "a", "an"}

# Particles dropped after verbs like "pick up".
_PARTICLES = {"up"}

DIRECTION_WORDS = {
    "north": Direction.NORTH,
    "n": Direction.NORTH,
    "south": Direction.SOUTH,
    "s": Direction.SOUTH,
    "east": Direction.EAST,
    "e": Direction.EAST,
    "west": Direction.WEST,
    "w": Direction.WEST,
}

VERBS = {
    "go": ActionKind.MOVE,
    "move": ActionKind.MOVE,
    "walk": ActionKind.MOVE,
    "open": ActionKind.OPEN,
    "take": ActionKind.TAKE,
    "get": ActionKind.TAKE,
    "grab": ActionKind.TAKE,
    "pick": ActionKind.TAKE,
    "drop": ActionKind.DROP,
    "look": ActionKind.LOOK,
    "l": ActionKind.LOOK,
    "inventory": ActionKind.INVENTORY,
    "inv": ActionKind.INVENTORY,
    "i": ActionKind.INVENTORY,
}


def normalize_text(text: str) -> str:
    """Lowercase, strip punctuation and articles, collapse whitespace."""
    cleaned = "".join(ch if ch.isalnum() or ch in "- " else " " for ch in text.lower())
    tokens = [t for t in cleaned.split() if t not in ARTICLES]
    return " ".join(tokens)


def parse_command(text: str) -> Action:
    """Parse free-form input into an Action, or raise ParseError."""
    tokens = normalize_text(text).split()
    if not tokens:
        raise ParseError(ParseErrorKind.EMPTY, "")

    head, rest = tokens[0], tokens[1:]

    # Bare direction shortcut: "n" is shorthand for "go north".
    if head in DIRECTION_WORDS and not rest:
        return Action(ActionKind.MOVE, DIRECTION_WORDS[head].value)

    verb = VERBS.get(head)
    if verb is None:
        raise ParseError(ParseErrorKind.UNKNOWN_VERB, head)

    if verb is ActionKind.LOOK:
        return LOOK
    if verb is ActionKind.INVENTORY:
        return INVENTORY

    rest = [t for t in rest if t not in _PARTICLES]
    if verb is ActionKind.MOVE:
        if not rest:
            raise ParseError(ParseErrorKind.UNKNOWN_OBJECT, "")
        direction = DIRECTION_WORDS.get(rest[0])
        if direction is None or len(rest) > 1:
            raise ParseError(ParseErrorKind.UNKNOWN_OBJECT, " ".join(rest))
        return Action(ActionKind.MOVE, direction.value)

    if not rest:
        raise ParseError(ParseErrorKind.UNKNOWN_OBJECT, "")
    return Action(verb, " ".join(rest))
