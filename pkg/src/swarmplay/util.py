"""Hashing, seeding, and canonical-JSON helpers shared across the package."""

from __future__ import annotations

import hashlib
import json
from typing import Any

SEED_RULE = "xor-sha256-v1"

_SEED_MASK = (1 << 63) - 1


def canonical_json(obj: Any) -> str:
    """Compact JSON with sorted keys, stable across runs and platforms."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def pretty_json(obj: Any) -> str:
    """Indented JSON with sorted keys; used for on-disk documents."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def stable_hash64(*parts: str) -> int:
    """First 8 bytes of sha256 over ':'-joined parts, as a non-negative int."""
    joined = ":".join(parts)
    digest = hashlib.sha256(joined.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & _SEED_MASK


def derive_seed(base: int, *parts: str) -> int:
    """Deterministic per-label sub-seed: base xor-ed with a stable label hash."""
    return (base & _SEED_MASK) ^ stable_hash64(*parts)
