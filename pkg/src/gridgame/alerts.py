"""Alert generation and bit-exact Unified2 serialization.

Sensors yield two event families: attack alerts, emitted with a detection
probability when an attacker action crosses a monitored link, and benign
background alerts arriving as Poisson noise.  Both land in one binary
stream (`alerts.u2`) with ground truth in a separate `labels.csv`, so the
dataset looks like a real IDS log while staying fully labeled.

Wire format: 8-byte record header (type, length) then an 84-byte body,
all integers big-endian, IPv4 endpoints stored as IPv4-mapped IPv6.
"""

from __future__ import annotations

import csv
import hashlib
import io
import ipaddress
import json
import logging
import struct
from collections import Counter
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .attack_graph import ActionEdge
from .scenario import ScenarioConfig, ScenarioValidationError, TopologyGraph

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
RECORD_TYPE = 105  # IPv6 event record; overridable per stream writer
GENERATOR_ID = 1
SIGNATURE_REVISION = 1

_BODY = struct.Struct(">9I16s16sHHBBBBIHH")
_HEADER = struct.Struct(">II")
BODY_LENGTH = _BODY.size
RECORD_LENGTH = _HEADER.size + BODY_LENGTH
assert BODY_LENGTH == 84

# Simulation clock: abstract effort units map to a fixed wall-time scale
# anchored at a constant epoch so reruns are byte-identical.
SECONDS_PER_TIME_UNIT = 3600
BASE_EPOCH = 1_600_000_000

CLASSIFICATION = {
    "codeExec": 1,
    "privEscalation": 2,
    "dos": 3,
    "infoLeak": 4,
    "credential": 5,
    "background": 6,
}

CREDENTIAL_SIGNATURE_NAME = "valid-account-reuse"

_BACKGROUND_PORTS = (53, 80, 123, 443, 1433, 3389, 8080)


class AlertFormatError(Exception):
    """Malformed or truncated Unified2 byte stream."""


@dataclass
class Unified2Event:
    sensor_id: int
    event_id: int
    event_second: int
    event_microsecond: int
    signature_id: int
    generator_id: int = GENERATOR_ID
    signature_revision: int = SIGNATURE_REVISION
    classification_id: int = 0
    priority_id: int = 3
    ip_source: str = "0.0.0.0"
    ip_destination: str = "0.0.0.0"
    source_port: int = 0
    dest_port: int = 0
    protocol: int = 6
    impact_flag: int = 0
    impact: int = 0
    blocked: int = 0
    mpls_label: int = 0
    vlan_id: int = 0
    padding: int = 0


def _pack_ip(address: str) -> bytes:
    parsed = ipaddress.ip_address(address)
    if parsed.version == 4:
        parsed = ipaddress.IPv6Address(f"::ffff:{parsed}")
    return parsed.packed


def _unpack_ip(raw: bytes) -> str:
    parsed = ipaddress.IPv6Address(raw)
    mapped = parsed.ipv4_mapped
    return str(mapped) if mapped is not None else str(parsed)


def serialize_event(event: Unified2Event, record_type: int = RECORD_TYPE) -> bytes:
    body = _BODY.pack(
        event.sensor_id,
        event.event_id,
        event.event_second,
        event.event_microsecond,
        event.signature_id,
        event.generator_id,
        event.signature_revision,
        event.classification_id,
        event.priority_id,
        _pack_ip(event.ip_source),
        _pack_ip(event.ip_destination),
        event.source_port,
        event.dest_port,
        event.protocol,
        event.impact_flag,
        event.impact,
        event.blocked,
        event.mpls_label,
        event.vlan_id,
        event.padding,
    )
    return _HEADER.pack(record_type, BODY_LENGTH) + body


def serialize_stream(events: list, record_type: int = RECORD_TYPE) -> bytes:
    return b"".join(serialize_event(e, record_type) for e in events)


def parse_stream(data: bytes, record_type: int = RECORD_TYPE) -> list:
    events = []
    offset = 0
    while offset < len(data):
        if offset + _HEADER.size > len(data):
            raise AlertFormatError(f"truncated record header at offset {offset}")
        rtype, length = _HEADER.unpack_from(data, offset)
        if offset + _HEADER.size + length > len(data):
            raise AlertFormatError(f"truncated record body at offset {offset}")
        if rtype != record_type:
            log.warning("skipping unknown record type %d at offset %d", rtype, offset)
            offset += _HEADER.size + length
            continue
        if length != BODY_LENGTH:
            raise AlertFormatError(
                f"record at offset {offset} declares body length {length}, "
                f"expected {BODY_LENGTH}"
            )
        fields = _BODY.unpack_from(data, offset + _HEADER.size)
        events.append(Unified2Event(
            sensor_id=fields[0],
            event_id=fields[1],
            event_second=fields[2],
            event_microsecond=fields[3],
            signature_id=fields[4],
            generator_id=fields[5],
            signature_revision=fields[6],
            classification_id=fields[7],
            priority_id=fields[8],
            ip_source=_unpack_ip(fields[9]),
            ip_destination=_unpack_ip(fields[10]),
            source_port=fields[11],
            dest_port=fields[12],
            protocol=fields[13],
            impact_flag=fields[14],
            impact=fields[15],
            blocked=fields[16],
            mpls_label=fields[17],
            vlan_id=fields[18],
            padding=fields[19],
        ))
        offset += _HEADER.size + length
    return events


def clock_to_stamp(units: float) -> tuple:
    """Simulation clock (time units) to (epoch second, microsecond)."""
    seconds = units * SECONDS_PER_TIME_UNIT
    whole = int(seconds)
    usec = int(round((seconds - whole) * 1_000_000))
    if usec >= 1_000_000:
        whole += 1
        usec -= 1_000_000
    return BASE_EPOCH + whole, usec


# --------------------------------------------------------------------------
# Signature catalog
# --------------------------------------------------------------------------

def stable_signature_id(name: str) -> int:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") & 0x7FFFFFFF


def severity_priority(exploitability: float) -> int:
    if exploitability >= 7.0:
        return 1
    if exploitability >= 4.0:
        return 2
    return 3


@dataclass(frozen=True)
class BenignProfile:
    """Emission shape of one benign-pool signature.

    A signature's classification, priority, and service endpoint belong to
    the detection rule, not to ground truth, so a reused attack signature
    fires with the same surface fields whether the trigger was malicious or
    not.  dest_port/protocol of None mean the generic background draws.
    """

    classification_id: int
    priority_id: int
    dest_port: int | None = None
    protocol: int | None = None


@dataclass
class SignatureCatalog:
    """Deterministic signature ids for attack steps plus a benign pool.

    A configurable share of the benign pool reuses attack signatures, and
    reused signatures keep their rule's classification, priority, and
    service endpoint; whether an alert was malicious lives only in the
    label column, never in any single alert field.
    """

    attack: dict  # vuln id (or credential marker) -> signature id
    priorities: dict  # signature id -> priority
    classifications: dict  # vuln id/marker -> classification id
    benign_pool: list = field(default_factory=list)
    benign_profiles: dict = field(default_factory=dict)  # signature id -> BenignProfile

    def attack_signature(self, vuln_id: str | None) -> int:
        return self.attack[vuln_id or CREDENTIAL_SIGNATURE_NAME]

    def attack_priority(self, vuln_id: str | None) -> int:
        return self.priorities[self.attack_signature(vuln_id)]

    def attack_classification(self, vuln_id: str | None) -> int:
        return self.classifications[vuln_id or CREDENTIAL_SIGNATURE_NAME]


def _rule_service(config: ScenarioConfig, vuln_id: str) -> tuple:
    """(protocol number, port) a reused signature fires on: the most common
    service among the hosts carrying the vulnerability."""
    counts: Counter = Counter()
    for node in config.topology.nodes.values():
        if any(v.id == vuln_id for v in node.vulnerabilities):
            for svc in node.services:
                counts[(svc.protocol, svc.port)] += 1
    if not counts:
        return None, None
    (protocol, port), _ = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return _PROTOCOL_NUMBERS.get(protocol, 6), port


def build_catalog(config: ScenarioConfig) -> SignatureCatalog:
    attack: dict = {}
    priorities: dict = {}
    classifications: dict = {}
    for vuln in sorted(config.vulnerability_pool.values(), key=lambda v: v.id):
        sig = stable_signature_id(vuln.id)
        attack[vuln.id] = sig
        priorities[sig] = severity_priority(vuln.exploitability)
        classifications[vuln.id] = CLASSIFICATION[vuln.consequence.value]
    cred_sig = stable_signature_id(CREDENTIAL_SIGNATURE_NAME)
    attack[CREDENTIAL_SIGNATURE_NAME] = cred_sig
    priorities[cred_sig] = 2
    classifications[CREDENTIAL_SIGNATURE_NAME] = CLASSIFICATION["credential"]

    if len(set(attack.values())) != len(attack):
        clashes = sorted(
            name for name, sig in attack.items()
            if list(attack.values()).count(sig) > 1
        )
        raise ScenarioValidationError(
            "signature id collision among: " + ", ".join(clashes)
        )

    noise = config.engine.noise
    pool_size = noise.benign_pool_size
    reused = min(int(round(noise.signature_overlap * pool_size)), len(attack))
    reused_names = sorted(attack)[:reused]
    benign = [attack[name] for name in reused_names]
    profiles = {}
    for name in reused_names:
        sig = attack[name]
        if name == CREDENTIAL_SIGNATURE_NAME:
            protocol, port = None, None
        else:
            protocol, port = _rule_service(config, name)
        profiles[sig] = BenignProfile(
            classification_id=classifications[name],
            priority_id=priorities[sig],
            dest_port=port,
            protocol=protocol,
        )
    filler_index = 0
    taken = set(attack.values()) | set(benign)
    while len(benign) < pool_size:
        sig = stable_signature_id(f"background-{filler_index}")
        filler_index += 1
        if sig in taken:
            continue
        taken.add(sig)
        benign.append(sig)
        profiles[sig] = BenignProfile(
            classification_id=CLASSIFICATION["background"],
            priority_id=3,
        )
    return SignatureCatalog(
        attack=attack,
        priorities=priorities,
        classifications=classifications,
        benign_pool=benign,
        benign_profiles=profiles,
    )


# --------------------------------------------------------------------------
# Emission
# --------------------------------------------------------------------------

_PROTOCOL_NUMBERS = {"tcp": 6, "udp": 17, "icmp": 1}


def _address_of(topology: TopologyGraph, node_id: str) -> str:
    return topology.nodes[node_id].address or "0.0.0.0"


def emit_attack_alerts(
    rng,
    catalog: SignatureCatalog,
    topology: TopologyGraph,
    edge: ActionEdge,
    sensors: list,
    p_detect: float,
    clock_units: float,
    blocked_flag: bool,
) -> list:
    """At most one event per attempt: nothing without sensor coverage,
    nothing for host-local steps, and a miss with probability 1-p_detect.

    ``sensors`` is the ordered placement; sensor_id is the 1-based rank of
    the first covered link.  The returned event has event_id 0; ids are
    assigned when the round's alerts are merged into the campaign stream.
    """
    if edge.is_local:
        return []
    covered = [link for link in edge.links if link in set(sensors)]
    if not covered:
        return []
    if rng.random() >= p_detect:
        return []
    link = min(covered, key=sensors.index)
    second, usec = clock_to_stamp(clock_units)
    return [Unified2Event(
        sensor_id=sensors.index(link) + 1,
        event_id=0,
        event_second=second,
        event_microsecond=usec,
        signature_id=catalog.attack_signature(edge.vuln_id),
        classification_id=catalog.attack_classification(edge.vuln_id),
        priority_id=catalog.attack_priority(edge.vuln_id),
        ip_source=_address_of(topology, edge.src_host),
        ip_destination=_address_of(topology, edge.dst_host),
        source_port=int(49152 + rng.integers(16384)),
        dest_port=edge.port or 0,
        protocol=_PROTOCOL_NUMBERS.get(edge.protocol or "tcp", 6),
        blocked=1 if blocked_flag else 0,
    )]


def emit_background(
    rng,
    catalog: SignatureCatalog,
    topology: TopologyGraph,
    sensors: list,
    rate: float,
    window_start: float,
    duration: float,
) -> list:
    """Benign chatter: per sensor, Poisson(rate * duration) events uniform
    over the round window, endpoints on the monitored link."""
    if rate < 0:
        raise ValueError("background rate must be >= 0")
    if duration <= 0 or rate == 0 or not sensors:
        return []
    events = []
    for rank, link in enumerate(sensors):
        count = int(rng.poisson(rate * duration))
        for _ in range(count):
            offset = float(rng.uniform(0.0, duration))
            second, usec = clock_to_stamp(window_start + offset)
            a, b = link
            if rng.random() < 0.5:
                a, b = b, a
            sig = catalog.benign_pool[int(rng.integers(len(catalog.benign_pool)))]
            profile = catalog.benign_profiles[sig]
            source_port = int(49152 + rng.integers(16384))
            if profile.dest_port is None:
                dest_port = int(_BACKGROUND_PORTS[int(rng.integers(len(_BACKGROUND_PORTS)))])
            else:
                dest_port = profile.dest_port
            if profile.protocol is None:
                protocol = 6 if rng.random() < 0.8 else 17
            else:
                protocol = profile.protocol
            events.append(Unified2Event(
                sensor_id=rank + 1,
                event_id=0,
                event_second=second,
                event_microsecond=usec,
                signature_id=sig,
                classification_id=profile.classification_id,
                priority_id=profile.priority_id,
                ip_source=_address_of(topology, a),
                ip_destination=_address_of(topology, b),
                source_port=source_port,
                dest_port=dest_port,
                protocol=protocol,
            ))
    return events


# --------------------------------------------------------------------------
# Dataset bundle
# --------------------------------------------------------------------------

ALERTS_FILE = "alerts.u2"
LABELS_FILE = "labels.csv"
MANIFEST_FILE = "manifest.json"
ROUNDS_FILE = "rounds.jsonl"
LABEL_HEADER = ("event_id", "label", "round", "action_ref")


@dataclass
class LabeledAlert:
    event: Unified2Event
    label: str  # "attack" | "background"
    round_no: int
    action_ref: str  # "" for background


def export_dataset(campaign, out_dir) -> Path:
    """Write one bundle directory: manifest, per-round log, alert stream,
    and the ground-truth label table (one row per event, same order)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / MANIFEST_FILE).write_text(
            json.dumps(campaign.manifest(), indent=2, sort_keys=True) + "\n"
        )
        with open(out / ROUNDS_FILE, "w") as handle:
            for record in campaign.rounds:
                handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        (out / ALERTS_FILE).write_bytes(
            serialize_stream([a.event for a in campaign.alerts])
        )
        with io.StringIO() as buf:
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(LABEL_HEADER)
            for alert in campaign.alerts:
                writer.writerow([
                    alert.event.event_id, alert.label, alert.round_no,
                    alert.action_ref,
                ])
            (out / LABELS_FILE).write_text(buf.getvalue())
    except OSError as exc:
        raise AlertFormatError(f"cannot write bundle under {out}: {exc}") from exc
    return out


def read_bundle(bundle_dir) -> tuple:
    """(events, labels, manifest) back from a bundle directory."""
    base = Path(bundle_dir)
    events = parse_stream((base / ALERTS_FILE).read_bytes())
    labels = []
    with open(base / LABELS_FILE, newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != LABEL_HEADER:
            raise AlertFormatError(f"unexpected label header {header}")
        for row in reader:
            labels.append((int(row[0]), row[1], int(row[2]), row[3]))
    manifest = json.loads((base / MANIFEST_FILE).read_text())
    return events, labels, manifest


def event_to_dict(event: Unified2Event) -> dict:
    return asdict(event)
