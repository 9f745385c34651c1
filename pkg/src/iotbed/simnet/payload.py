"""Payload synthesis and empirical entropy.

Encrypted traffic is modelled as uniform random bytes (empirical Shannon
entropy of a 256-byte sample sits near 7.06 bits/byte); plaintext as a
stream of dictionary words and digits (about 4.3 bits/byte).  Devices that
hold sensitive data leak a recognizable GPS marker inside plaintext
payloads, which the leakage checks key on.
"""

from __future__ import annotations

import math
import random
import re
from collections import Counter

GPS_MARKER = "GPS="

# Small fixed vocabulary; enough symbol spread to stay well under the
# 7.0 bits/byte line while looking like real telemetry text.
_WORDS = (
    "temp humidity status battery motion door open closed lock unlock "
    "stream frame sensor reading update ping event alert level mode "
    "zone home away night schedule timer value unit device node hub "
    "report sync config state power signal link channel data item"
).split()


def shannon_entropy(data: bytes) -> float:
    """Empirical entropy in bits per byte; 0.0 for empty input."""
    if not data:
        return 0.0
    counts = Counter(data)
    n = len(data)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def encrypted_payload(rng: random.Random, size: int) -> bytes:
    return rng.randbytes(size)


def plaintext_payload(rng: random.Random, size: int,
                      marker: str | None = None) -> bytes:
    """Word-token stream of exactly `size` bytes, optional embedded marker."""
    parts: list[str] = []
    length = 0
    if marker:
        parts.append(marker)
        length = len(marker) + 1
    while length < size + 16:
        token = rng.choice(_WORDS)
        if rng.random() < 0.3:
            token += str(rng.randrange(1000))
        parts.append(token)
        length += len(token) + 1
    text = " ".join(parts)
    return text.encode("ascii")[:size]


def gps_marker(lat: float, lon: float) -> str:
    return f"{GPS_MARKER}{lat:.5f},{lon:.5f}"


def find_gps_marker(data: bytes) -> str | None:
    """Return the planted marker token if present, else None."""
    match = _MARKER_RE.search(data)
    if match is None:
        return None
    return match.group(0).decode("ascii")


_MARKER_RE = re.compile(rb"GPS=-?\d+\.\d+,-?\d+\.\d+")
