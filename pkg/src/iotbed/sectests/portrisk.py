"""Port-risk metric: score open ports against a vulnerable-port list.

The default list ships with the five entries whose scores are known good
(80 and 5900 at 3, 445 and 49152 at 1, 443 at 5); operators extend or
replace it via a CSV file of `port,description,score` lines.  Totals map
to risk levels as: 0 safe, below 15 minor, 15 through 30 major, above 30
critical; both boundary values close into MAJOR so the levels partition
every possible total.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from ..errors import AnalysisError
from .verdict import Grade


@dataclass(frozen=True)
class PortScoreEntry:
    port: int
    description: str
    score: float


DEFAULT_SCORE_LIST: dict[int, PortScoreEntry] = {
    80: PortScoreEntry(80, "A web server is running on this port", 3),
    5900: PortScoreEntry(5900, "A vnc server is running on this port", 3),
    445: PortScoreEntry(445, "Microsoft-DS Active Directory, Windows shares", 1),
    443: PortScoreEntry(443, "A TLSv1 server answered on this port", 5),
    49152: PortScoreEntry(
        49152, "The Win32 process 'wininit.exe' is listening on this port", 1),
}


def load_score_list(path: str) -> dict[int, PortScoreEntry]:
    entries: dict[int, PortScoreEntry] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 3:
                raise AnalysisError(
                    f"score list line {row_no}: expected port,description,score")
            try:
                port = int(row[0])
                score = float(row[2])
            except ValueError as exc:
                raise AnalysisError(f"score list line {row_no}: {exc}") from exc
            if score < 0:
                raise AnalysisError(
                    f"score list line {row_no}: negative score")
            if port in entries:
                raise AnalysisError(
                    f"score list line {row_no}: duplicate port {port}")
            entries[port] = PortScoreEntry(port, row[1].strip(), score)
    return entries


def risk_level(total: float) -> Grade:
    if total == 0:
        return Grade.SAFE
    if total < 15:
        return Grade.MINOR_RISK
    if total <= 30:
        return Grade.MAJOR_RISK
    return Grade.CRITICAL_RISK


@dataclass(frozen=True)
class RiskAssessment:
    open_ports: tuple[int, ...]
    scored: tuple[PortScoreEntry, ...]
    unscored: tuple[int, ...]
    total_score: float
    risk_level: Grade


def score_ports(open_ports: list[int],
                score_list: dict[int, PortScoreEntry] | None = None
                ) -> RiskAssessment:
    if score_list is None:
        score_list = DEFAULT_SCORE_LIST
    ports = tuple(sorted(set(open_ports)))
    scored = tuple(score_list[p] for p in ports if p in score_list)
    unscored = tuple(p for p in ports if p not in score_list)
    total = sum(e.score for e in scored)
    if total == int(total):
        total = int(total)
    return RiskAssessment(open_ports=ports, scored=scored, unscored=unscored,
                          total_score=total, risk_level=risk_level(total))
