"""Random text mutations of valid scenarios, for parser robustness tests."""

import random

ALPHABET = list("{}[]()<>|;:,=+-*/^&\"\n #x0.") + ["(x)", "(.)", "->", "pointer", "linked", "query"]


def mutate(text: str, rng: random.Random) -> str:
    for _ in range(rng.randint(1, 3)):
        pos = rng.randrange(len(text) + 1)
        op = rng.choice(("delete", "insert", "replace", "swap"))
        if op == "delete" and text:
            end = min(len(text), pos + rng.randint(1, 4))
            text = text[:pos] + text[end:]
        elif op == "insert":
            text = text[:pos] + rng.choice(ALPHABET) + text[pos:]
        elif op == "replace" and pos < len(text):
            text = text[:pos] + rng.choice(ALPHABET) + text[pos + 1 :]
        elif pos + 1 < len(text):
            text = text[:pos] + text[pos + 1] + text[pos] + text[pos + 2 :]
    return text


def within_bounds(text: str, line: int, col: int) -> bool:
    """1-based (line, col) names a character of text or the position just past a line end."""
    lines = text.split("\n")
    if not 1 <= line <= len(lines):
        return False
    return 1 <= col <= len(lines[line - 1]) + 1
