"""Loopback transport backend: real TCP sockets on 127.0.0.1.

Each open virtual port becomes a threaded TCP server on an OS-assigned
loopback port; requests travel as length-prefixed frames and are answered
by the same ServiceEngine the in-memory backend uses.  Background
telemetry, status sampling, attack bursts and proxies run as daemon
threads on the wall clock, so timing here is NOT deterministic; the
memory backend is the one with reproducibility guarantees.

Intended for integration realism; call shutdown() when done.
"""

from __future__ import annotations

import itertools
import random
import socket
import socketserver
import struct
import threading
import time

from ..errors import TransportError
from .capture import CaptureRecord, CaptureTap, classify_direction
from .context import ContextEvent, ContextFeed
from .devspec import DeviceSpec
from .memnet import CaptureHandle, ProxyMutator, _flip_bits
from .payload import encrypted_payload, gps_marker, plaintext_payload
from .services import DeviceState, ServiceEngine
from .status import InternalStatusSample, synth_sample

FRAME_HEAD = struct.Struct(">I")
REQUEST_TIMEOUT_S = 2.0


def _send_frame(sock: socket.socket, data: bytes) -> None:
    sock.sendall(FRAME_HEAD.pack(len(data)) + data)


def _recv_exact(sock: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def _recv_frame(sock: socket.socket) -> bytes | None:
    head = _recv_exact(sock, FRAME_HEAD.size)
    if head is None:
        return None
    (length,) = FRAME_HEAD.unpack(head)
    if length > 1 << 20:
        return None
    return _recv_exact(sock, length)


class _FrameServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class _LoopDevice:
    def __init__(self, net: "LoopbackNetwork", spec: DeviceSpec):
        self.net = net
        self.spec = spec
        self.state = DeviceState()
        self.rng = random.Random(f"{net.seed}/{spec.device_id}")
        self.engine = ServiceEngine(spec, self.state, self.rng)
        self.lock = threading.Lock()
        self.samples: list[InternalStatusSample] = []
        self.port_map: dict[int, int] = {}      # virtual -> real
        self.proxy_map: dict[int, int] = {}     # virtual -> relay real port
        self.servers: list[_FrameServer] = []
        self.stop_event = threading.Event()
        self.burst_until = 0.0
        self.burst_count = 0
        self._in_trigger_window = False
        self._eph = itertools.count(40000)

    # -- servers --------------------------------------------------------
    def start(self) -> None:
        for vport in self.spec.ports:
            server = _FrameServer(("127.0.0.1", 0), self._make_handler(vport))
            self.port_map[vport] = server.server_address[1]
            self.servers.append(server)
            threading.Thread(target=server.serve_forever, daemon=True).start()
        threading.Thread(target=self._status_loop, daemon=True).start()
        if self.spec.traffic is not None:
            threading.Thread(target=self._telemetry_loop, daemon=True).start()
        if self.spec.compromise is not None:
            self.net.feed.subscribe(self._on_context)

    def _make_handler(self, vport: int):
        device = self

        class Handler(socketserver.BaseRequestHandler):
            def handle(self):
                while True:
                    data = _recv_frame(self.request)
                    if data is None:
                        return
                    with device.lock:
                        reply = device.engine.handle(vport, data)
                        crashed = device.state.crashed
                    if crashed:
                        device.kill()
                        return
                    if reply is not None:
                        try:
                            _send_frame(self.request, reply)
                        except OSError:
                            return

        return Handler

    def kill(self) -> None:
        self.state.alive = False
        self.stop_event.set()
        for server in self.servers:
            threading.Thread(target=server.shutdown, daemon=True).start()

    # -- background -----------------------------------------------------
    def _status_loop(self) -> None:
        period = self.spec.monitor.period_s
        while not self.stop_event.wait(period):
            if not self.state.alive:
                return
            now = self.net.now()
            with self.lock:
                self.samples.append(synth_sample(
                    self.spec.monitor, self.rng, now, self.spec.device_id,
                    bursting=now <= self.burst_until))

    def _telemetry_loop(self) -> None:
        traffic = self.spec.traffic
        if traffic.session_rate <= 0:
            return
        gap_s = 60.0 / traffic.session_rate
        while not self.stop_event.wait(gap_s * self.rng.uniform(0.5, 1.0)):
            if not self.state.alive:
                return
            self._run_session()

    def _run_session(self) -> None:
        traffic = self.spec.traffic
        src_port = next(self._eph)
        n_packets = self.rng.randint(8, 16)
        sock = self.net.cloud_connect()
        try:
            for i in range(n_packets):
                if i > 0 or self.stop_event.is_set():
                    gap = max(1.0, self.rng.gauss(
                        traffic.gap_ms, traffic.gap_stddev_ms)) / 1000.0
                    if self.stop_event.wait(gap):
                        return
                size = max(32, min(4096, int(self.rng.gauss(
                    traffic.size_mean, traffic.size_stddev))))
                payload = self._telemetry_payload(size)
                if sock is not None:
                    try:
                        _send_frame(sock, payload)
                    except OSError:
                        sock = None
                self.net.emit(src=self.spec.device_id, src_port=src_port,
                              dst="cloud", dst_port=8883,
                              ttl=traffic.ttl, kind="background",
                              payload=payload)
        finally:
            if sock is not None:
                sock.close()

    def _telemetry_payload(self, size: int) -> bytes:
        if self.spec.payload_mode == "encrypted":
            return encrypted_payload(self.rng, size)
        marker = None
        if self.spec.leaks_location():
            marker = gps_marker(*self.engine.location)
        return plaintext_payload(self.rng, size, marker)

    # -- compromise -----------------------------------------------------
    def _on_context(self, event: ContextEvent) -> None:
        comp = self.spec.compromise
        if comp is None or not self.state.alive:
            return
        self.engine.location = (event.lat, event.lon)
        match = comp.trigger.matches(event)
        if match and not self._in_trigger_window:
            threading.Thread(target=self._burst, daemon=True).start()
        self._in_trigger_window = match

    def _burst(self) -> None:
        comp = self.spec.compromise
        pairs = [(t, p) for t in comp.targets for p in comp.probe_ports]
        self.burst_until = self.net.now() + \
            len(pairs) * comp.probe_interval_ms / 1000.0 + 0.5
        self.burst_count += 1
        for target, port in pairs:
            if self.stop_event.is_set() or not self.state.alive:
                return
            self.net.emit(src=self.spec.device_id, src_port=next(self._eph),
                          dst=target, dst_port=port,
                          ttl=self.spec.traffic.ttl if self.spec.traffic else 64,
                          kind="attack_probe", payload=b"")
            peer = self.net.devices.get(target)
            if peer is not None:
                real = peer.port_map.get(port)
                if real is not None:
                    sock = socket.socket()
                    sock.settimeout(0.2)
                    if sock.connect_ex(("127.0.0.1", real)) == 0:
                        banner = peer.spec.ports[port].effective_banner()
                        self.net.emit(src=target, src_port=port,
                                      dst=self.spec.device_id, dst_port=0,
                                      ttl=64, kind="banner",
                                      payload=banner.encode("ascii"))
                    sock.close()
            time.sleep(comp.probe_interval_ms / 1000.0)


class _Relay(socketserver.ThreadingTCPServer):
    """Frame-level proxy applying a ProxyMutator between client and device."""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, upstream_port: int, mutator: ProxyMutator):
        self.upstream_port = upstream_port
        self.mutator = mutator
        self._acc_lock = threading.Lock()
        self._drop_acc = 0.0
        self._corrupt_acc = 0.0
        super().__init__(("127.0.0.1", 0), _RelayHandler)

    def decide(self) -> tuple[bool, bool]:
        with self._acc_lock:
            self._drop_acc += self.mutator.drop_rate
            drop = self._drop_acc >= 1.0
            if drop:
                self._drop_acc -= 1.0
            self._corrupt_acc += self.mutator.corrupt_rate
            corrupt = self._corrupt_acc >= 1.0
            if corrupt:
                self._corrupt_acc -= 1.0
        return drop, corrupt


class _RelayHandler(socketserver.BaseRequestHandler):
    def handle(self):
        relay: _Relay = self.server
        upstream = socket.socket()
        upstream.settimeout(REQUEST_TIMEOUT_S)
        try:
            upstream.connect(("127.0.0.1", relay.upstream_port))
        except OSError:
            return
        with upstream:
            while True:
                data = _recv_frame(self.request)
                if data is None:
                    return
                drop, corrupt = relay.decide()
                if drop:
                    continue
                if corrupt:
                    data = _flip_bits(data)
                try:
                    _send_frame(upstream, data)
                    reply = _recv_frame(upstream)
                except OSError:
                    return
                if reply is None:
                    continue
                if relay.mutator.delay_ms > 0:
                    time.sleep(relay.mutator.delay_ms / 1000.0)
                try:
                    _send_frame(self.request, reply)
                except OSError:
                    return


class _CloudSink(socketserver.ThreadingTCPServer):
    """Discards telemetry frames, counting them."""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(self):
        self.frames = 0
        self._lock = threading.Lock()
        super().__init__(("127.0.0.1", 0), _CloudHandler)

    def count(self) -> None:
        with self._lock:
            self.frames += 1


class _CloudHandler(socketserver.BaseRequestHandler):
    def handle(self):
        while True:
            if _recv_frame(self.request) is None:
                return
            self.server.count()


class LoopConnection:
    def __init__(self, net: "LoopbackNetwork", sock: socket.socket, src: str,
                 src_port: int, dst: str, dst_port: int, banner: str):
        self.net = net
        self.sock = sock
        self.src = src
        self.src_port = src_port
        self.dst = dst
        self.dst_port = dst_port
        self.banner = banner
        self.closed = False

    def request(self, data: bytes, kind: str = "request") -> bytes | None:
        if self.closed:
            raise TransportError("connection closed")
        self.net.emit(src=self.src, src_port=self.src_port, dst=self.dst,
                      dst_port=self.dst_port, ttl=64, kind=kind, payload=data)
        try:
            _send_frame(self.sock, data)
            reply = _recv_frame(self.sock)
        except OSError:
            return None
        if reply is None:
            return None
        self.net.emit(src=self.dst, src_port=self.dst_port, dst=self.src,
                      dst_port=self.src_port, ttl=64, kind="response",
                      payload=reply)
        return reply

    def close(self) -> None:
        if not self.closed:
            self.closed = True
            self.sock.close()


class LoopDeviceHandle:
    def __init__(self, device: _LoopDevice):
        self._device = device

    @property
    def device_id(self) -> str:
        return self._device.spec.device_id

    @property
    def spec(self) -> DeviceSpec:
        return self._device.spec

    @property
    def alive(self) -> bool:
        return self._device.state.alive

    def local_process_list(self) -> str | None:
        return self._device.engine.local_process_list()

    def all_samples(self) -> list[InternalStatusSample]:
        with self._device.lock:
            return list(self._device.samples)


class LoopbackNetwork:
    """Real-socket sibling of MemoryNetwork with the same operation set."""

    backend_name = "loopback"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.tap = CaptureTap()
        self.feed = ContextFeed()
        self.devices: dict[str, _LoopDevice] = {}
        self.dut_ids: set[str] = set()
        self.emitted = 0
        self._emit_lock = threading.Lock()
        self._t0 = time.monotonic()
        self._eph = itertools.count(50000)
        self._capture_ids = itertools.count(1)
        self._captures: dict[int, CaptureHandle] = {}
        self._relays: dict[str, list[_Relay]] = {}
        self.cloud = _CloudSink()
        threading.Thread(target=self.cloud.serve_forever, daemon=True).start()

    # -- plumbing -------------------------------------------------------
    def now(self) -> float:
        return time.monotonic() - self._t0

    def observe(self, seconds: float) -> None:
        time.sleep(seconds)

    def emit(self, src: str, src_port: int, dst: str, dst_port: int,
             ttl: int, kind: str, payload: bytes) -> None:
        with self._emit_lock:
            self.emitted += 1
            self.tap.add(CaptureRecord.build(
                seq=self.emitted, ts=self.now(), src_addr=src,
                src_port=src_port, dst_addr=dst, dst_port=dst_port, ttl=ttl,
                kind=kind,
                direction=classify_direction(src, dst, self.dut_ids),
                payload=payload))

    def cloud_connect(self) -> socket.socket | None:
        sock = socket.socket()
        sock.settimeout(1.0)
        try:
            sock.connect(("127.0.0.1", self.cloud.server_address[1]))
            return sock
        except OSError:
            sock.close()
            return None

    # -- device lifecycle -----------------------------------------------
    def spawn_device(self, spec: DeviceSpec, dut: bool = True) -> LoopDeviceHandle:
        spec.validate()
        if spec.device_id in self.devices:
            raise TransportError(
                f"ports already bound for device {spec.device_id!r}")
        device = _LoopDevice(self, spec)
        self.devices[spec.device_id] = device
        if dut:
            self.dut_ids.add(spec.device_id)
        device.start()
        return LoopDeviceHandle(device)

    def handle(self, device_id: str) -> LoopDeviceHandle:
        device = self.devices.get(device_id)
        if device is None:
            raise TransportError(f"unknown device {device_id!r}")
        return LoopDeviceHandle(device)

    def stop_device(self, device_id: str) -> None:
        device = self.devices.get(device_id)
        if device is None:
            raise TransportError(f"unknown device {device_id!r}")
        device.kill()

    # -- context ---------------------------------------------------------
    def advance_context(self, events: list[ContextEvent]) -> None:
        if any(b.t < a.t for a, b in zip(events, events[1:])):
            raise TransportError("context events not sorted")
        for event in events:
            self.feed.publish(event)

    # -- client operations ----------------------------------------------
    def _real_port(self, device: _LoopDevice, vport: int) -> int | None:
        if device.spec.device_id in self._relays:
            mapped = device.proxy_map.get(vport)
            if mapped is not None:
                return mapped
        return device.port_map.get(vport)

    def connect(self, src: str, dst: str, port: int) -> LoopConnection | None:
        device = self.devices.get(dst)
        if device is None:
            raise TransportError(f"unreachable target {dst!r}")
        src_port = next(self._eph)
        self.emit(src=src, src_port=src_port, dst=dst, dst_port=port,
                  ttl=64, kind="probe", payload=b"")
        real = self._real_port(device, port)
        if real is None or not device.state.alive:
            return None
        sock = socket.socket()
        sock.settimeout(REQUEST_TIMEOUT_S)
        try:
            sock.connect(("127.0.0.1", real))
            _send_frame(sock, b"BANNER")
            banner_bytes = _recv_frame(sock)
        except OSError:
            sock.close()
            return None
        if banner_bytes is None:
            sock.close()
            return None
        banner = banner_bytes.decode("ascii", "replace")
        self.emit(src=dst, src_port=port, dst=src, dst_port=src_port,
                  ttl=64, kind="banner", payload=banner_bytes)
        return LoopConnection(self, sock, src, src_port, dst, port, banner)

    def scan_ports(self, src: str, dst: str,
                   ports: list[int] | range) -> list[tuple[int, str]]:
        device = self.devices.get(dst)
        if device is None:
            raise TransportError(f"unreachable target {dst!r}")
        found: list[tuple[int, str]] = []
        src_port = next(self._eph)
        for port in ports:
            self.emit(src=src, src_port=src_port, dst=dst, dst_port=port,
                      ttl=64, kind="probe", payload=b"")
            real = device.port_map.get(port)
            if real is None or not device.state.alive:
                continue
            sock = socket.socket()
            sock.settimeout(REQUEST_TIMEOUT_S)
            try:
                sock.connect(("127.0.0.1", real))
                _send_frame(sock, b"BANNER")
                banner_bytes = _recv_frame(sock)
            except OSError:
                sock.close()
                continue
            sock.close()
            if banner_bytes is None:
                continue
            banner = banner_bytes.decode("ascii", "replace")
            self.emit(src=dst, src_port=port, dst=src, dst_port=src_port,
                      ttl=64, kind="banner", payload=banner_bytes)
            found.append((port, banner))
        return sorted(found)

    # -- proxy -----------------------------------------------------------
    def proxy(self, device_id: str, mutator: ProxyMutator) -> None:
        device = self.devices.get(device_id)
        if device is None:
            raise TransportError(f"unknown device {device_id!r}")
        if device_id in self._relays:
            raise TransportError(f"device {device_id!r} already proxied")
        relays = []
        for vport, real in device.port_map.items():
            relay = _Relay(real, mutator)
            device.proxy_map[vport] = relay.server_address[1]
            threading.Thread(target=relay.serve_forever, daemon=True).start()
            relays.append(relay)
        self._relays[device_id] = relays

    def unproxy(self, device_id: str) -> None:
        for relay in self._relays.pop(device_id, []):
            relay.shutdown()
            relay.server_close()
        device = self.devices.get(device_id)
        if device is not None:
            device.proxy_map.clear()

    def is_proxied(self, device_id: str) -> bool:
        return device_id in self._relays

    # -- captures ---------------------------------------------------------
    def start_capture(self, scope: set[str] | None = None) -> CaptureHandle:
        if scope is not None and not scope:
            raise TransportError("empty capture scope")
        with self._emit_lock:
            handle = CaptureHandle(next(self._capture_ids), scope,
                                   len(self.tap))
        self._captures[handle.handle_id] = handle
        return handle

    def stop_capture(self, handle: CaptureHandle) -> list[CaptureRecord]:
        if handle.handle_id not in self._captures:
            raise TransportError("unknown capture handle")
        del self._captures[handle.handle_id]
        handle.open = False
        records = self.tap.since(handle.start_idx)
        if handle.scope is None:
            return records
        return [r for r in records
                if r.src_addr in handle.scope or r.dst_addr in handle.scope]

    # -- telemetry --------------------------------------------------------
    def sample_status(self, device_id: str, t0: float,
                      t1: float) -> list[InternalStatusSample]:
        device = self.devices.get(device_id)
        if device is None:
            raise TransportError(f"unknown device {device_id!r}")
        if device.state.crashed:
            raise TransportError(f"device {device_id!r} is dead")
        with device.lock:
            return [s for s in device.samples if t0 <= s.ts < t1]

    def all_status(self) -> list[InternalStatusSample]:
        merged: list[InternalStatusSample] = []
        for device in self.devices.values():
            with device.lock:
                merged.extend(device.samples)
        merged.sort(key=lambda s: (s.ts, s.device_id))
        return merged

    # -- shutdown ---------------------------------------------------------
    def shutdown(self) -> None:
        for device_id in list(self._relays):
            self.unproxy(device_id)
        for device in self.devices.values():
            device.kill()
        self.cloud.shutdown()
        self.cloud.server_close()
        for device in self.devices.values():
            for server in device.servers:
                server.server_close()
