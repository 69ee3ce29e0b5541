/**
 * Numeric projection of labeled alerts for the models.
 *
 * One row per event in stream order. Addresses are integer-encoded, the
 * timestamp becomes the delta to the previous event in the stream (0 for
 * the first), and everything else is already numeric. No missing values:
 * every field exists on every record by construction of the wire format.
 */
import { LabeledEvent } from "./bundle.js";
import { addressToInt } from "./unified2.js";

export const FEATURE_NAMES = [
  "signature_id",
  "generator_id",
  "classification_id",
  "priority_id",
  "protocol",
  "source_port",
  "dest_port",
  "src_addr",
  "dst_addr",
  "time_delta",
  "sensor_id",
] as const;

export interface FeatureTable {
  /** row-major, one row per event, columns per FEATURE_NAMES */
  rows: number[][];
  /** 1 attack, 0 background */
  labels: number[];
  eventIds: number[];
  rounds: number[];
}

export function buildFeatureTable(events: LabeledEvent[]): FeatureTable {
  const rows: number[][] = [];
  const labels: number[] = [];
  const eventIds: number[] = [];
  const rounds: number[] = [];
  let prev: number | null = null;
  for (const event of events) {
    const r = event.record;
    const t = r.eventSecond + r.eventMicrosecond * 1e-6;
    const delta = prev === null ? 0 : t - prev;
    prev = t;
    rows.push([
      r.signatureId,
      r.generatorId,
      r.classificationId,
      r.priorityId,
      r.protocol,
      r.sourcePort,
      r.destPort,
      addressToInt(r.ipSource),
      addressToInt(r.ipDestination),
      delta,
      r.sensorId,
    ]);
    labels.push(event.label);
    eventIds.push(event.eventId);
    rounds.push(event.round);
  }
  return { rows, labels, eventIds, rounds };
}

/** Row subset of a table by index list, preserving order. */
export function subset(table: FeatureTable, idx: number[]): FeatureTable {
  return {
    rows: idx.map((i) => table.rows[i]),
    labels: idx.map((i) => table.labels[i]),
    eventIds: idx.map((i) => table.eventIds[i]),
    rounds: idx.map((i) => table.rounds[i]),
  };
}
