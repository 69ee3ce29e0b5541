/**
 * Dataset bundle loading.
 *
 * A bundle directory holds manifest.json, alerts.u2, and labels.csv (plus a
 * per-round log this tool does not need). A comparison directory holds a
 * top-level manifest with a "bundles" list and one sub-bundle per
 * (seed, method) pair.
 */
import * as fs from "node:fs";
import * as path from "node:path";

import { AlertRecord, parseAlertStream } from "./unified2.js";

export class BundleError extends Error {}

export interface LabelRow {
  eventId: number;
  label: number; // 1 attack, 0 background
  round: number;
  actionRef: string;
}

export interface LabeledEvent {
  record: AlertRecord;
  eventId: number;
  label: number;
  round: number;
  actionRef: string;
}

export interface DatasetBundle {
  dir: string;
  manifest: Record<string, unknown>;
  events: LabeledEvent[];
}

export interface ComparisonSet {
  dir: string;
  manifest: Record<string, unknown>;
  methods: string[];
  seeds: number[];
  rounds: number;
  /** method -> seed -> loaded bundle */
  bundles: Map<string, Map<number, DatasetBundle>>;
}

const LABEL_HEADER = "event_id,label,round,action_ref";
const LABEL_VALUES: Record<string, number> = { attack: 1, background: 0 };

// --------------------------------------------------------------------------
// Single bundle
// --------------------------------------------------------------------------

export function parseLabelsCsv(text: string): LabelRow[] {
  const lines = text.split("\n");
  if ((lines[0] ?? "").trim() !== LABEL_HEADER) {
    throw new BundleError(
      `labels.csv header is "${(lines[0] ?? "").trim()}", expected "${LABEL_HEADER}"`,
    );
  }
  const rows: LabelRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "") continue;
    const parts = line.split(",");
    if (parts.length !== 4) {
      throw new BundleError(`labels.csv line ${i + 1}: expected 4 fields, got ${parts.length}`);
    }
    const label = LABEL_VALUES[parts[1]];
    if (label === undefined) {
      throw new BundleError(`labels.csv line ${i + 1}: unknown label "${parts[1]}"`);
    }
    rows.push({
      eventId: parseIntStrict(parts[0], `labels.csv line ${i + 1} event_id`),
      label,
      round: parseIntStrict(parts[2], `labels.csv line ${i + 1} round`),
      actionRef: parts[3],
    });
  }
  return rows;
}

/**
 * Load one bundle and join alerts to labels on event id. The join must be
 * total in both directions; any orphan id on either side is a hard error
 * because it means the bundle files drifted apart.
 */
export function loadBundle(dir: string): DatasetBundle {
  const manifest = readManifest(dir);
  if ("bundles" in manifest) {
    throw new BundleError(
      `${dir} is a comparison set, not a single bundle; load it with loadComparisonSet`,
    );
  }
  const alerts = parseAlertStream(fs.readFileSync(path.join(dir, "alerts.u2")));
  const labels = parseLabelsCsv(
    fs.readFileSync(path.join(dir, "labels.csv"), "utf8"),
  );

  const byId = new Map<number, LabelRow>();
  for (const row of labels) {
    if (byId.has(row.eventId)) {
      throw new BundleError(`labels.csv: duplicate event_id ${row.eventId}`);
    }
    byId.set(row.eventId, row);
  }
  const seen = new Set<number>();
  const events: LabeledEvent[] = [];
  const unlabeled: number[] = [];
  for (const record of alerts) {
    const row = byId.get(record.eventId);
    if (row === undefined) {
      unlabeled.push(record.eventId);
      continue;
    }
    seen.add(record.eventId);
    events.push({
      record,
      eventId: record.eventId,
      label: row.label,
      round: row.round,
      actionRef: row.actionRef,
    });
  }
  const unmatched = [...byId.keys()].filter((id) => !seen.has(id));
  if (unlabeled.length > 0 || unmatched.length > 0) {
    throw new BundleError(
      `${dir}: alert/label join is not total; ` +
        `alerts without labels: [${idList(unlabeled)}], ` +
        `labels without alerts: [${idList(unmatched)}]`,
    );
  }
  return { dir, manifest, events };
}

// --------------------------------------------------------------------------
// Comparison set
// --------------------------------------------------------------------------

export function loadComparisonSet(dir: string): ComparisonSet {
  const manifest = readManifest(dir);
  const entries = manifest["bundles"];
  if (!Array.isArray(entries)) {
    throw new BundleError(`${dir}: manifest has no "bundles" list`);
  }
  const methods = (manifest["methods"] as string[]) ?? [];
  const seeds = (manifest["seeds"] as number[]) ?? [];
  const rounds = Number(manifest["rounds"] ?? 0);
  const bundles = new Map<string, Map<number, DatasetBundle>>();
  for (const entry of entries as Array<Record<string, unknown>>) {
    const method = String(entry["method"]);
    const seed = Number(entry["seed"]);
    const sub = loadBundle(path.join(dir, String(entry["bundle"])));
    if (!bundles.has(method)) bundles.set(method, new Map());
    bundles.get(method)!.set(seed, sub);
  }
  for (const method of methods) {
    for (const seed of seeds) {
      if (!bundles.get(method)?.has(seed)) {
        throw new BundleError(`${dir}: missing bundle for method ${method} seed ${seed}`);
      }
    }
  }
  return { dir, manifest, methods, seeds, rounds, bundles };
}

/** True when the directory's manifest declares a comparison set. */
export function isComparisonSet(dir: string): boolean {
  return "bundles" in readManifest(dir);
}

// --------------------------------------------------------------------------
// Helpers
// --------------------------------------------------------------------------

function readManifest(dir: string): Record<string, unknown> {
  const file = path.join(dir, "manifest.json");
  let text: string;
  try {
    text = fs.readFileSync(file, "utf8");
  } catch (err) {
    throw new BundleError(`${dir}: cannot read manifest.json: ${(err as Error).message}`);
  }
  return JSON.parse(text) as Record<string, unknown>;
}

function parseIntStrict(text: string, what: string): number {
  const value = Number(text);
  if (!Number.isInteger(value)) {
    throw new BundleError(`${what}: "${text}" is not an integer`);
  }
  return value;
}

function idList(ids: number[], cap = 10): string {
  const head = ids.slice(0, cap).join(", ");
  return ids.length > cap ? `${head}, ... ${ids.length - cap} more` : head;
}
