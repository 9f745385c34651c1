"""Application-level behavior of simulated devices.

Both transport backends hand incoming requests to the same ServiceEngine so
a device reacts identically on the in-memory network and on real loopback
sockets.  The wire grammar is a small ASCII command language:

    BANNER                     -> service banner
    LOGIN <user> <pass> [nonce=<n>] -> "OK token=..." | "DENIED" | "DENIED replay"
    CMD <name> [nonce=<n>]     -> payload bytes (synthesized) | "DENIED replay"
    DOWNGRADE <suite>          -> "ACCEPT plaintext" | "REJECT"
    VPROBE <id>                -> "OK" | "VULNERABLE <id>"
    ENUM                       -> "PROCS a,b,c" | "DENIED"

Anything else is malformed input: depending on the device's declared
robustness flags it crashes, silently ignores it, or answers
"ERROR malformed".
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .devspec import DeviceSpec, PortSpec
from .payload import encrypted_payload, gps_marker, plaintext_payload

PROCESS_LIST = "init,telemetryd,updater,appd"

# Default device location used for leak markers before any context arrives.
HOME_LAT, HOME_LON = 32.0853, 34.7818

VERBS = ("BANNER", "LOGIN", "CMD", "DOWNGRADE", "VPROBE", "ENUM")


@dataclass
class DeviceState:
    alive: bool = True
    crashed: bool = False
    used_nonces: set[str] = field(default_factory=set)
    downgraded_ports: set[int] = field(default_factory=set)
    token_counter: int = 0


class ServiceEngine:
    def __init__(self, spec: DeviceSpec, state: DeviceState,
                 rng: random.Random):
        self.spec = spec
        self.state = state
        self.rng = rng
        self.location: tuple[float, float] = (HOME_LAT, HOME_LON)

    # ------------------------------------------------------------------
    def _payload(self, port: int) -> bytes:
        traffic = self.spec.traffic
        mean = traffic.size_mean if traffic else 256.0
        stddev = traffic.size_stddev if traffic else 64.0
        size = max(64, min(4096, int(self.rng.gauss(mean, stddev))))
        plaintext = (self.spec.payload_mode == "plaintext"
                     or port in self.state.downgraded_ports)
        if not plaintext:
            return encrypted_payload(self.rng, size)
        marker = None
        if self.spec.leaks_location():
            marker = gps_marker(*self.location)
        return plaintext_payload(self.rng, size, marker)

    def _freshness(self, port: PortSpec) -> bool:
        if port.freshness is not None:
            return port.freshness
        return self.spec.replay_protected

    def _check_nonce(self, port: PortSpec, tokens: list[str]) -> bool:
        """True when the request is acceptably fresh."""
        nonce = None
        for tok in tokens:
            if tok.startswith("nonce="):
                nonce = tok[6:]
        if nonce is None:
            return True
        if self._freshness(port) and nonce in self.state.used_nonces:
            return False
        self.state.used_nonces.add(nonce)
        return True

    def _malformed(self, port: PortSpec) -> bytes | None:
        if port.crash_on_malformed:
            self.state.alive = False
            self.state.crashed = True
            return None
        if self.spec.ignores_malformed:
            return None
        return b"ERROR malformed"

    # ------------------------------------------------------------------
    def handle(self, port_no: int, data: bytes) -> bytes | None:
        """Process one request against one open port; None means no reply."""
        if not self.state.alive:
            return None
        port = self.spec.ports.get(port_no)
        if port is None:
            return None
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError:
            return self._malformed(port)
        tokens = text.split()
        if not tokens or tokens[0] not in VERBS:
            return self._malformed(port)
        verb = tokens[0]

        if verb == "BANNER":
            return port.effective_banner().encode("ascii")

        if verb == "LOGIN":
            if len(tokens) < 3:
                return self._malformed(port)
            if not self._check_nonce(port, tokens):
                return b"DENIED replay"
            creds = f"{tokens[1]}:{tokens[2]}"
            if port.default_creds is not None and creds == port.default_creds:
                self.state.token_counter += 1
                return f"OK token=tok{self.state.token_counter}".encode("ascii")
            return b"DENIED"

        if verb == "CMD":
            if not self._check_nonce(port, tokens):
                return b"DENIED replay"
            return self._payload(port_no)

        if verb == "DOWNGRADE":
            if self.spec.accepts_downgrade:
                self.state.downgraded_ports.add(port_no)
                return b"ACCEPT plaintext"
            return b"REJECT"

        if verb == "VPROBE":
            if len(tokens) < 2:
                return self._malformed(port)
            if tokens[1] in port.vulnerable_to:
                return f"VULNERABLE {tokens[1]}".encode("ascii")
            return b"OK"

        if verb == "ENUM":
            # introspection mode says where admin credentials are required;
            # "none" means nowhere, so the remote list is wide open.
            if self.spec.introspection == "none":
                return f"PROCS {PROCESS_LIST}".encode("ascii")
            return b"DENIED"

        return self._malformed(port)

    def local_process_list(self) -> str | None:
        """Process list over the local channel, without admin credentials."""
        if self.spec.introspection in ("none", "local"):
            return PROCESS_LIST
        return None
