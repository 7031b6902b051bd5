"""Stable seed derivation for parallel-schedule-independent reproducibility."""

import hashlib


def derive_seed(*parts) -> int:
    """Derive a 64-bit seed from a master seed plus identifying fields.

    The derivation is a stable hash of the stringified parts, so the same
    (master seed, field...) tuple yields the same stream on every platform
    and regardless of evaluation order.
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
