"""Named sub-streams derived from one run seed.

Every component draws its randomness from ``sub_seed(seed, name)`` so runs
are reproducible end to end and components stay independently replayable.
"""

from __future__ import annotations

import hashlib


def sub_seed(seed: int, stream: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stream}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF
