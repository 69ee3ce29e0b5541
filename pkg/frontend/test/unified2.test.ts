import { describe, expect, it } from "vitest";

import {
  AlertStreamError,
  RECORD_LENGTH,
  addressToInt,
  parseAlertStream,
} from "../src/unified2.js";
import { buildRecord, ipv4Mapped } from "./helpers.js";

// One record captured from the simulator's writer, hand-decoded.
const GOLDEN_BYTES = Buffer.from(
  "0000006900000054" + // type 105, body length 84
    "000000070000002a5f5e1e100003d090" + // sensor 7, event 42, stamp
    "1234567800000001000000010000000100000002" + // sig, gen, rev, class, prio
    "00000000000000000000ffff0a050102" + // ::ffff:10.5.1.2
    "00000000000000000000ffff0a010304" + // ::ffff:10.1.3.4
    "c35001f6" + // ports 50000 -> 502
    "06000001" + // proto tcp, flags, blocked
    "000000000000" + // mpls, vlan
    "0000", // pad
  "hex",
);

describe("parseAlertStream", () => {
  it("decodes the golden record field by field", () => {
    expect(GOLDEN_BYTES.length).toBe(RECORD_LENGTH);
    const [rec] = parseAlertStream(GOLDEN_BYTES);
    expect(rec.recordType).toBe(105);
    expect(rec.sensorId).toBe(7);
    expect(rec.eventId).toBe(42);
    expect(rec.eventSecond).toBe(1_600_003_600);
    expect(rec.eventMicrosecond).toBe(250_000);
    expect(rec.signatureId).toBe(0x12345678);
    expect(rec.generatorId).toBe(1);
    expect(rec.signatureRevision).toBe(1);
    expect(rec.classificationId).toBe(1);
    expect(rec.priorityId).toBe(2);
    expect(Buffer.from(rec.ipSource)).toEqual(ipv4Mapped("10.5.1.2"));
    expect(Buffer.from(rec.ipDestination)).toEqual(ipv4Mapped("10.1.3.4"));
    expect(rec.sourcePort).toBe(50000);
    expect(rec.destPort).toBe(502);
    expect(rec.protocol).toBe(6);
    expect(rec.impactFlag).toBe(0);
    expect(rec.impact).toBe(0);
    expect(rec.blocked).toBe(1);
    expect(rec.mplsLabel).toBe(0);
    expect(rec.vlanId).toBe(0);
  });

  it("round-trips records built by the test helper", () => {
    const stream = Buffer.concat([
      buildRecord({ eventId: 1, destPort: 502, signatureId: 9001 }),
      buildRecord({ eventId: 2, sourcePort: 1234, protocol: 17 }),
    ]);
    const records = parseAlertStream(stream);
    expect(records).toHaveLength(2);
    expect(records[0].eventId).toBe(1);
    expect(records[0].destPort).toBe(502);
    expect(records[0].signatureId).toBe(9001);
    expect(records[1].eventId).toBe(2);
    expect(records[1].sourcePort).toBe(1234);
    expect(records[1].protocol).toBe(17);
  });

  it("parses an empty stream to an empty list", () => {
    expect(parseAlertStream(Buffer.alloc(0))).toEqual([]);
  });

  it("rejects a truncated header", () => {
    const stream = Buffer.concat([GOLDEN_BYTES, Buffer.alloc(5)]);
    expect(() => parseAlertStream(stream)).toThrow(AlertStreamError);
    expect(() => parseAlertStream(stream)).toThrow(/truncated record header/);
  });

  it("rejects a truncated body", () => {
    const stream = GOLDEN_BYTES.subarray(0, 60);
    expect(() => parseAlertStream(stream)).toThrow(/truncated record body/);
  });

  it("rejects an unexpected body length", () => {
    const mangled = Buffer.from(GOLDEN_BYTES);
    mangled.writeUInt32BE(80, 4);
    expect(() => parseAlertStream(mangled)).toThrow(/body length 80/);
  });
});

describe("addressToInt", () => {
  it("extracts the embedded value from IPv4-mapped addresses", () => {
    expect(addressToInt(ipv4Mapped("10.5.1.2"))).toBe(0x0a050102);
    expect(addressToInt(ipv4Mapped("255.255.255.255"))).toBe(0xffffffff);
  });

  it("folds other addresses into an unsigned 32-bit value", () => {
    const addr = Buffer.from("20010db8000000000000000000000001", "hex");
    expect(addressToInt(addr)).toBe((0x20010db8 ^ 0x00000001) >>> 0);
    const high = Buffer.from("ffffffff000000000000000000000000", "hex");
    expect(addressToInt(high)).toBe(0xffffffff);
  });

  it("keeps distinct hosts distinct", () => {
    expect(addressToInt(ipv4Mapped("10.0.0.1"))).not.toBe(
      addressToInt(ipv4Mapped("10.0.0.2")),
    );
  });
});
