"""Device spec files: everything a simulated device needs to behave.

One file can declare several devices.  Each `device:` line opens a block;
the lines that follow attach properties to it.  Values are `key=value`
tokens (shlex rules, so banners may be quoted); `port:`, `os:` and `app:`
lines additionally take leading positional fields.

    device: cam01 type=ip_camera
    address: 10.0.0.11
    port: 80 service=http banner="lighttpd 1.4.35" default_creds=admin:admin
    port: 443 service=https banner="TLSv1 server" vulnerable_to=probe_hb
    os: linux 3.18 up_to_date=false
    app: camsrv 2.1 up_to_date=false risk=major
    traffic: size_mean=512 size_stddev=96 gap_ms=80 gap_stddev_ms=18 ttl=64 session_rate=4
    timing_range: min_ms=60 max_ms=220
    robustness: ignores_malformed=true
    encryption: payload=plaintext accepts_downgrade=true replay_protected=false
    introspection: local
    stored_data: sensitive
    monitor: period_s=1 cpu_base=12 cpu_noise=2 cpu_spike=55
    compromise: lat=32.0853 lon=34.7818 radius_m=150 ports=22,80,443 interval_ms=40 targets=hub01
    false_alarm: at_s=300 packets=40
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field

from ..errors import ScenarioError, ValidationError
from .context import ContextPredicate

# Ordered sensitivity ladder for stored data.
DATA_CLASSES = ("none", "normal", "sensitive", "critical")

# Where admin credentials are required for a process listing.
INTROSPECTION_MODES = ("none", "local", "remote_blocked")


def data_class_rank(name: str) -> int:
    return DATA_CLASSES.index(name)


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class PortSpec:
    number: int
    service: str = "tcp"
    banner: str = ""
    default_creds: str | None = None       # "user:pass" accepted at LOGIN
    crash_on_malformed: bool = False
    freshness: bool | None = None          # None: inherit replay_protected
    vulnerable_to: tuple[str, ...] = ()    # probe ids that elicit a weak reply

    def effective_banner(self) -> str:
        return self.banner or f"{self.service} service on port {self.number}"


@dataclass
class SoftwareSpec:
    name: str
    version: str
    up_to_date: bool = True
    risk: str = "low"                      # low | major | critical


@dataclass
class TrafficSpec:
    size_mean: float = 256.0
    size_stddev: float = 64.0
    gap_ms: float = 100.0
    gap_stddev_ms: float = 20.0
    ttl: int = 64
    session_rate: float = 1.0              # sessions per minute


@dataclass
class MonitorSpec:
    period_s: float = 1.0
    cpu_base: float = 10.0                 # percent
    cpu_noise: float = 2.0
    cpu_spike: float = 60.0                # added during an attack burst
    mem_base: float = 32e6                 # bytes
    mem_noise: float = 2.5e5
    mem_spike: float = 8e6


@dataclass
class CompromiseSpec:
    trigger: ContextPredicate
    probe_ports: tuple[int, ...]
    probe_interval_ms: float
    targets: tuple[str, ...]


@dataclass
class FalseAlarmSpec:
    at_s: float
    packets: int
    gap_ms: float = 50.0


@dataclass
class DeviceSpec:
    device_id: str
    device_type: str = "generic"
    address: str = ""
    connectivity: str = "wifi"
    ports: dict[int, PortSpec] = field(default_factory=dict)
    os: SoftwareSpec | None = None
    apps: list[SoftwareSpec] = field(default_factory=list)
    traffic: TrafficSpec | None = None
    timing_min_ms: float | None = None     # accepted transaction-gap band
    timing_max_ms: float | None = None
    ignores_malformed: bool = False
    payload_mode: str = "encrypted"        # encrypted | plaintext
    accepts_downgrade: bool = False
    replay_protected: bool = True
    introspection: str | None = None       # None until declared
    stored_data_class: str = "none"
    monitor: MonitorSpec = field(default_factory=MonitorSpec)
    compromise: CompromiseSpec | None = None
    false_alarm: FalseAlarmSpec | None = None

    def open_ports(self) -> list[int]:
        return sorted(self.ports)

    def protocols(self) -> list[str]:
        return sorted({p.service for p in self.ports.values()})

    def leaks_location(self) -> bool:
        # Plaintext devices holding sensitive-or-worse data embed GPS markers.
        return (self.payload_mode == "plaintext"
                and data_class_rank(self.stored_data_class)
                >= data_class_rank("sensitive"))

    def validate(self) -> None:
        if self.timing_min_ms is not None and self.timing_max_ms is not None:
            if self.timing_min_ms > self.timing_max_ms:
                raise ValidationError(
                    f"{self.device_id}: timing range min > max")
        if self.traffic is not None:
            if self.traffic.size_stddev < 0 or self.traffic.gap_stddev_ms < 0:
                raise ValidationError(
                    f"{self.device_id}: negative traffic stddev")
            if self.traffic.session_rate < 0:
                raise ValidationError(
                    f"{self.device_id}: session_rate must be >= 0")
        for port in self.ports.values():
            if not 1 <= port.number <= 65535:
                raise ValidationError(
                    f"{self.device_id}: port {port.number} out of range")


def _split_kv(tokens: list[str], line: int,
              positional: int = 0) -> tuple[list[str], dict[str, str]]:
    pos: list[str] = []
    kv: dict[str, str] = {}
    for token in tokens:
        if "=" in token:
            key, _, val = token.partition("=")
            kv[key] = val
        elif len(pos) < positional:
            pos.append(token)
        else:
            raise ScenarioError(f"unexpected token {token!r}", line)
    if len(pos) < positional:
        raise ScenarioError(
            f"expected {positional} positional fields, got {len(pos)}", line)
    return pos, kv


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p)


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(p for p in text.split(",") if p)


def parse_device_spec(text: str) -> list[DeviceSpec]:
    devices: list[DeviceSpec] = []
    dev: DeviceSpec | None = None

    def need(line: int) -> DeviceSpec:
        if dev is None:
            raise ScenarioError("property before any device line", line)
        return dev

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, body = stripped.partition(":")
        key = key.strip()
        if not sep:
            raise ScenarioError(f"expected 'key: value', got {stripped!r}",
                                line_no)
        try:
            tokens = shlex.split(body.strip())
        except ValueError as exc:
            raise ScenarioError(str(exc), line_no) from exc
        try:
            if key == "device":
                pos, kv = _split_kv(tokens, line_no, positional=1)
                if any(d.device_id == pos[0] for d in devices):
                    raise ScenarioError(f"duplicate device {pos[0]!r}", line_no)
                dev = DeviceSpec(device_id=pos[0])
                dev.device_type = kv.get("type", dev.device_type)
                devices.append(dev)
            elif key == "address":
                need(line_no).address = tokens[0]
            elif key == "connectivity":
                need(line_no).connectivity = tokens[0]
            elif key == "port":
                pos, kv = _split_kv(tokens, line_no, positional=1)
                port = PortSpec(number=int(pos[0]))
                port.service = kv.get("service", port.service)
                port.banner = kv.get("banner", port.banner)
                port.default_creds = kv.get("default_creds")
                if "crash_on_malformed" in kv:
                    port.crash_on_malformed = _parse_bool(kv["crash_on_malformed"])
                if "freshness" in kv:
                    port.freshness = _parse_bool(kv["freshness"])
                if "vulnerable_to" in kv:
                    port.vulnerable_to = _str_list(kv["vulnerable_to"])
                d = need(line_no)
                if port.number in d.ports:
                    raise ScenarioError(f"duplicate port {port.number}", line_no)
                d.ports[port.number] = port
            elif key in ("os", "app"):
                pos, kv = _split_kv(tokens, line_no, positional=2)
                sw = SoftwareSpec(name=pos[0], version=pos[1])
                if "up_to_date" in kv:
                    sw.up_to_date = _parse_bool(kv["up_to_date"])
                sw.risk = kv.get("risk", sw.risk)
                if key == "os":
                    need(line_no).os = sw
                else:
                    need(line_no).apps.append(sw)
            elif key == "traffic":
                _, kv = _split_kv(tokens, line_no)
                t = TrafficSpec()
                for name in ("size_mean", "size_stddev", "gap_ms",
                             "gap_stddev_ms", "session_rate"):
                    if name in kv:
                        setattr(t, name, float(kv[name]))
                if "ttl" in kv:
                    t.ttl = int(kv["ttl"])
                need(line_no).traffic = t
            elif key == "timing_range":
                _, kv = _split_kv(tokens, line_no)
                need(line_no).timing_min_ms = float(kv["min_ms"])
                need(line_no).timing_max_ms = float(kv["max_ms"])
            elif key == "robustness":
                _, kv = _split_kv(tokens, line_no)
                if "ignores_malformed" in kv:
                    need(line_no).ignores_malformed = \
                        _parse_bool(kv["ignores_malformed"])
            elif key == "encryption":
                _, kv = _split_kv(tokens, line_no)
                d = need(line_no)
                if "payload" in kv:
                    if kv["payload"] not in ("encrypted", "plaintext"):
                        raise ScenarioError(
                            f"bad payload mode {kv['payload']!r}", line_no)
                    d.payload_mode = kv["payload"]
                if "accepts_downgrade" in kv:
                    d.accepts_downgrade = _parse_bool(kv["accepts_downgrade"])
                if "replay_protected" in kv:
                    d.replay_protected = _parse_bool(kv["replay_protected"])
            elif key == "introspection":
                mode = tokens[0]
                if mode not in INTROSPECTION_MODES:
                    raise ScenarioError(f"bad introspection mode {mode!r}",
                                        line_no)
                need(line_no).introspection = mode
            elif key == "stored_data":
                cls = tokens[0]
                if cls not in DATA_CLASSES:
                    raise ScenarioError(f"bad data class {cls!r}", line_no)
                need(line_no).stored_data_class = cls
            elif key == "monitor":
                _, kv = _split_kv(tokens, line_no)
                m = need(line_no).monitor
                for name in ("period_s", "cpu_base", "cpu_noise", "cpu_spike",
                             "mem_base", "mem_noise", "mem_spike"):
                    if name in kv:
                        setattr(m, name, float(kv[name]))
            elif key == "compromise":
                _, kv = _split_kv(tokens, line_no)
                window_start = window_end = None
                if "window" in kv:
                    lo, _, hi = kv["window"].partition("-")
                    window_start, window_end = float(lo), float(hi)
                trigger = ContextPredicate(
                    center_lat=float(kv["lat"]) if "lat" in kv else None,
                    center_lon=float(kv["lon"]) if "lon" in kv else None,
                    radius_m=float(kv["radius_m"]) if "radius_m" in kv else None,
                    window_start=window_start,
                    window_end=window_end,
                )
                need(line_no).compromise = CompromiseSpec(
                    trigger=trigger,
                    probe_ports=_int_list(
                        kv.get("ports", "21,22,23,80,443,8080,8883,9100")),
                    probe_interval_ms=float(kv.get("interval_ms", "25")),
                    targets=_str_list(kv.get("targets", "")),
                )
            elif key == "false_alarm":
                _, kv = _split_kv(tokens, line_no)
                need(line_no).false_alarm = FalseAlarmSpec(
                    at_s=float(kv["at_s"]),
                    packets=int(kv.get("packets", "40")),
                    gap_ms=float(kv.get("gap_ms", "50")),
                )
            else:
                raise ScenarioError(f"unknown property {key!r}", line_no)
        except ScenarioError:
            raise
        except (ValueError, KeyError, IndexError, ValidationError) as exc:
            raise ScenarioError(f"{key}: {exc}", line_no) from exc

    if not devices:
        raise ScenarioError("no devices declared", 1)
    for d in devices:
        try:
            d.validate()
        except ValidationError as exc:
            raise ScenarioError(str(exc), 1) from exc
    return devices


def load_device_spec(path: str) -> list[DeviceSpec]:
    with open(path, encoding="utf-8") as fh:
        return parse_device_spec(fh.read())
