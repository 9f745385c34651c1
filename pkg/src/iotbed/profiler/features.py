"""Session feature extraction from capture records.

Records are grouped into sessions by their bidirectional 5-tuple with a gap
timeout, and each session is summarized into a fixed 10-dimensional vector:

    0 pkt_size mean        5 inter_arrival_ms stddev
    1 pkt_size stddev      6 modal ttl (ties -> smallest)
    2 pkt_size min         7 packet count
    3 pkt_size max         8 byte count
    4 inter_arrival_ms mean   9 direction ratio (src == first packet's src)

Statistics use the population stddev and include the first packet's zero
inter-arrival, so a one-packet session is well defined.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from statistics import fmean, pstdev

SUMMARY_LENGTH = 10
SESSION_GAP_S = 30.0

SUMMARY_NAMES = (
    "size_mean", "size_stddev", "size_min", "size_max",
    "gap_mean_ms", "gap_stddev_ms", "modal_ttl",
    "packet_count", "byte_count", "direction_ratio",
)


@dataclass(frozen=True)
class SequenceInstance:
    """One observed session: per-packet rows plus their fixed summary."""

    session_key: tuple[str, str, int, int, str]   # src, dst, sport, dport, proto
    features: tuple[tuple[int, int, float], ...]  # (ttl, pkt_size, inter_arrival_ms)
    summary: tuple[float, ...]
    label: str | None = None

    def __post_init__(self):
        if not self.features:
            raise ValueError("feature list must be non-empty")
        if any(row[2] < 0 for row in self.features):
            raise ValueError("inter_arrival_ms must be >= 0")
        if len(self.summary) != SUMMARY_LENGTH:
            raise ValueError(f"summary must have {SUMMARY_LENGTH} entries")

    def with_label(self, label: str) -> "SequenceInstance":
        return SequenceInstance(self.session_key, self.features,
                                self.summary, label)


def summarize(rows: list[tuple[int, int, float]],
              direction_ratio: float) -> tuple[float, ...]:
    sizes = [size for _, size, _ in rows]
    gaps = [gap for _, _, gap in rows]
    ttls = Counter(ttl for ttl, _, _ in rows)
    modal_ttl = max(ttls.items(), key=lambda kv: (kv[1], -kv[0]))[0]
    return (
        fmean(sizes), pstdev(sizes), float(min(sizes)), float(max(sizes)),
        fmean(gaps), pstdev(gaps), float(modal_ttl),
        float(len(rows)), float(sum(sizes)), direction_ratio,
    )


def _canonical(record) -> tuple:
    a = (record.src_addr, record.src_port)
    b = (record.dst_addr, record.dst_port)
    lo, hi = sorted((a, b))
    return (lo, hi, record.proto)


def extract_features(capture, gap_timeout_s: float = SESSION_GAP_S,
                     label: str | None = None) -> list[SequenceInstance]:
    """Group capture records into sessions and summarize each one.

    An empty capture yields an empty list.  Instances come out in order of
    each session's first packet.
    """
    open_sessions: dict[tuple, list] = {}
    done: list[list] = []
    for rec in sorted(capture, key=lambda r: (r.ts, r.seq)):
        key = _canonical(rec)
        current = open_sessions.get(key)
        if current is not None and rec.ts - current[-1].ts > gap_timeout_s:
            done.append(current)
            current = None
        if current is None:
            current = []
            open_sessions[key] = current
        current.append(rec)
    done.extend(open_sessions.values())
    done.sort(key=lambda packets: (packets[0].ts, packets[0].seq))

    instances = []
    for packets in done:
        first = packets[0]
        rows = []
        prev_ts = None
        for rec in packets:
            gap_ms = 0.0 if prev_ts is None else (rec.ts - prev_ts) * 1000.0
            rows.append((rec.ttl, rec.size, gap_ms))
            prev_ts = rec.ts
        ratio = sum(1 for rec in packets
                    if rec.src_addr == first.src_addr) / len(packets)
        instances.append(SequenceInstance(
            session_key=(first.src_addr, first.dst_addr,
                         first.src_port, first.dst_port, first.proto),
            features=tuple(rows),
            summary=summarize(rows, ratio),
            label=label,
        ))
    return instances
