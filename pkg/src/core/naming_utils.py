"""
Naming helpers for generated domain points, concepts and corpus files.
"""

import re
from typing import Collection

TWIN_MARK = "'"


def ensure_unique_name(name: str, existing_names: Collection[str]) -> str:
    """
    Ensures name is unique among existing_names by appending a number if needed.

    'foo' collides -> 'foo_1', 'foo_2', ...
    """
    if name not in existing_names:
        return name

    # Strip a previous numeric suffix so 'foo_1' collides into 'foo_2', not 'foo_1_1'
    match = re.search(r'_(\d+)$', name)
    base, num = (name[:match.start()], int(match.group(1))) if match else (name, 0)
    while True:
        num += 1
        candidate = f"{base}_{num}"
        if candidate not in existing_names:
            return candidate


def twin_name(name: str, existing_names: Collection[str]) -> str:
    """
    Name of the twin of a domain point: the name with a trailing prime.

    Falls back to ensure_unique_name when the primed name is taken
    (e.g. the domain already contains both x and x').
    """
    return ensure_unique_name(f"{name}{TWIN_MARK}", existing_names)


def slug(name: str) -> str:
    """File-system safe version of a corpus entry name."""
    cleaned = re.sub(r'[^A-Za-z0-9_.-]+', '-', name).strip('-')
    return cleaned or "entry"
