"""Registry of valid top-level domains.

Loads the published IANA tlds-alpha-by-domain file format: '#' comment
lines, then one TLD per line. A snapshot is pinned in data/tlds.txt so
classification results stay reproducible; callers can point at a different
snapshot per run.
"""

from __future__ import annotations

import hashlib
import os
import re
from importlib import resources
from typing import IO, Iterable

ENV_TLD_LIST = "ROOTTRACE_TLDS"

_ENTRY_RE = re.compile(r"[a-z0-9-]{1,63}\Z")


class RegistryError(ValueError):
    pass


class TldRegistry:
    """Immutable set of lowercase TLD strings with case-insensitive lookup."""

    __slots__ = ("entries", "source_description", "_entries_b")

    def __init__(self, entries: Iterable[str], source_description: str):
        self.entries = frozenset(entries)
        self.source_description = source_description
        self._entries_b = frozenset(e.encode("ascii") for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, tld: str) -> bool:
        return tld.lower() in self.entries

    def is_valid_tld(self, label: bytes | str) -> bool:
        """True iff the lowercase ASCII folding of label is a registry entry.

        Labels holding bytes outside the entry alphabet are simply invalid,
        never an error.
        """
        if isinstance(label, str):
            try:
                label = label.encode("ascii")
            except UnicodeEncodeError:
                return False
        return label.lower() in self._entries_b


def load_registry(lines: Iterable[str] | IO[str], source_description: str = "<stream>") -> TldRegistry:
    """Build a registry from text lines in the IANA list format.

    Rejects (with the line number) any entry that is empty, over 63 bytes,
    or holds characters outside a-z 0-9 '-'; rejects an empty registry.
    """
    entries: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        entry = line.lower()
        if not _ENTRY_RE.fullmatch(entry):
            raise RegistryError(f"{source_description}:{lineno}: invalid TLD entry {line!r}")
        entries.add(entry)
    if not entries:
        raise RegistryError(f"{source_description}: empty registry")
    return TldRegistry(entries, source_description)


def load_registry_path(path: str | os.PathLike) -> TldRegistry:
    """Load a registry file, describing it by path and content fingerprint.

    The description is deterministic for identical file content so reports
    embedding it stay byte-identical across runs.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    digest = hashlib.sha256(data).hexdigest()[:12]
    text = data.decode("utf-8")
    registry = load_registry(text.splitlines(), source_description=str(path))
    return TldRegistry(
        registry.entries,
        f"{path} ({len(registry)} entries, sha256:{digest})",
    )


_default: TldRegistry | None = None


def default_registry() -> TldRegistry:
    """The pinned snapshot shipped with the package (or $ROOTTRACE_TLDS)."""
    global _default
    override = os.environ.get(ENV_TLD_LIST)
    if override:
        return load_registry_path(override)
    if _default is None:
        ref = resources.files("roottrace").joinpath("data/tlds.txt")
        data = ref.read_bytes()
        digest = hashlib.sha256(data).hexdigest()[:12]
        registry = load_registry(data.decode("utf-8").splitlines(), "builtin:data/tlds.txt")
        _default = TldRegistry(
            registry.entries,
            f"builtin:data/tlds.txt ({len(registry)} entries, sha256:{digest})",
        )
    return _default
