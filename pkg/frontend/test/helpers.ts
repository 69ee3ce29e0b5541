/** Builders for synthetic bundles used across the test files. */
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

export interface EventFields {
  sensorId?: number;
  eventId: number;
  eventSecond?: number;
  eventMicrosecond?: number;
  signatureId?: number;
  generatorId?: number;
  signatureRevision?: number;
  classificationId?: number;
  priorityId?: number;
  ipSource?: string;
  ipDestination?: string;
  sourcePort?: number;
  destPort?: number;
  protocol?: number;
  blocked?: number;
}

export interface LabeledFields extends EventFields {
  label: "attack" | "background";
  round: number;
  actionRef?: string;
}

/** Serialize one 92-byte record the way the simulator writes them. */
export function buildRecord(fields: EventFields): Buffer {
  const body = Buffer.alloc(84);
  body.writeUInt32BE(fields.sensorId ?? 1, 0);
  body.writeUInt32BE(fields.eventId, 4);
  body.writeUInt32BE(fields.eventSecond ?? 1_600_000_000, 8);
  body.writeUInt32BE(fields.eventMicrosecond ?? 0, 12);
  body.writeUInt32BE(fields.signatureId ?? 1001, 16);
  body.writeUInt32BE(fields.generatorId ?? 1, 20);
  body.writeUInt32BE(fields.signatureRevision ?? 1, 24);
  body.writeUInt32BE(fields.classificationId ?? 6, 28);
  body.writeUInt32BE(fields.priorityId ?? 3, 32);
  ipv4Mapped(fields.ipSource ?? "10.0.0.1").copy(body, 36);
  ipv4Mapped(fields.ipDestination ?? "10.0.0.2").copy(body, 52);
  body.writeUInt16BE(fields.sourcePort ?? 50000, 68);
  body.writeUInt16BE(fields.destPort ?? 80, 70);
  body.writeUInt8(fields.protocol ?? 6, 72);
  body.writeUInt8(0, 73); // impact flag
  body.writeUInt8(0, 74); // impact
  body.writeUInt8(fields.blocked ?? 0, 75);
  body.writeUInt32BE(0, 76); // mpls
  body.writeUInt16BE(0, 80); // vlan
  body.writeUInt16BE(0, 82); // pad

  const header = Buffer.alloc(8);
  header.writeUInt32BE(105, 0);
  header.writeUInt32BE(84, 4);
  return Buffer.concat([header, body]);
}

export function ipv4Mapped(dotted: string): Buffer {
  const out = Buffer.alloc(16);
  out[10] = 0xff;
  out[11] = 0xff;
  const parts = dotted.split(".").map(Number);
  for (let i = 0; i < 4; i++) out[12 + i] = parts[i];
  return out;
}

/** Write a complete bundle directory; returns its path. */
export function makeBundle(
  events: LabeledFields[],
  manifestExtra: Record<string, unknown> = {},
): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "mleval-bundle-"));
  const manifest = {
    format_version: 1,
    record_type: 105,
    seed: 1,
    method: "with_defender",
    rounds: events.reduce((acc, e) => Math.max(acc, e.round), 0),
    event_count: events.length,
    ...manifestExtra,
  };
  fs.writeFileSync(path.join(dir, "manifest.json"), JSON.stringify(manifest));
  fs.writeFileSync(
    path.join(dir, "alerts.u2"),
    Buffer.concat(events.map((e) => buildRecord(e))),
  );
  const lines = ["event_id,label,round,action_ref"];
  for (const e of events) {
    lines.push(`${e.eventId},${e.label},${e.round},${e.actionRef ?? ""}`);
  }
  fs.writeFileSync(path.join(dir, "labels.csv"), lines.join("\n") + "\n");
  return dir;
}

/**
 * A bundle whose label is perfectly recoverable from dest_port, spread
 * over `rounds` rounds with both classes in every round.
 */
export function separableBundle(rounds: number, perRound = 8): string {
  const events: LabeledFields[] = [];
  let id = 1;
  for (let round = 1; round <= rounds; round++) {
    for (let i = 0; i < perRound; i++) {
      const attack = i % 4 === 0; // 25% attacks
      events.push({
        eventId: id,
        round,
        label: attack ? "attack" : "background",
        destPort: attack ? 2000 : 80,
        signatureId: 1000 + (i % 5),
        eventSecond: 1_600_000_000 + round * 3600 + i * 60,
        sensorId: (i % 3) + 1,
      });
      id++;
    }
  }
  return makeBundle(events);
}

export function tempDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "mleval-out-"));
}

export const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
