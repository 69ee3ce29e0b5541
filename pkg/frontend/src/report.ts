/**
 * CSV output. One long-format report.csv carries both row kinds
 * (model_scores and method_matrix) under a shared header; curves.csv has
 * one row per model per iteration for plotting.
 */
import * as fs from "node:fs";
import * as path from "node:path";

import { IterationScore, MethodMatrixCell, meanScores } from "./evaluate.js";
import { Params } from "./models/index.js";

export const REPORT_FILE = "report.csv";
export const CURVES_FILE = "curves.csv";

export interface BundleRunResult {
  bundle: string;
  seed: number;
  method: string;
  iterations: IterationScore[];
}

export interface ComparisonRunResult {
  bundle: string;
  cells: MethodMatrixCell[];
}

const REPORT_HEADER = [
  "kind", "bundle", "seed", "method", "model", "iterations",
  "accuracy", "recall", "precision", "f1", "auc", "mcc",
  "fit_ms", "auc_source",
  "train_method", "test_method", "mcc_ci_low", "mcc_ci_high", "seeds",
];

const CURVES_HEADER = [
  "bundle", "seed", "method", "model", "iteration", "train_rows", "test_rows",
  "accuracy", "recall", "precision", "f1", "auc", "mcc",
  "fit_ms", "auc_source", "params",
];

export function writeReports(
  outDir: string,
  runs: BundleRunResult[],
  comparisons: ComparisonRunResult[],
): { reportPath: string; curvesPath: string } {
  fs.mkdirSync(outDir, { recursive: true });

  const reportRows: string[][] = [];
  for (const run of runs) {
    const means = meanScores(run.iterations);
    const sources = new Map<string, string>();
    for (const row of run.iterations) {
      sources.set(row.model, row.aucSource);
    }
    for (const [model, m] of means) {
      const fitTotal = run.iterations
        .filter((r) => r.model === model)
        .reduce((acc, r) => acc + r.fitMs, 0);
      reportRows.push([
        "model_scores", run.bundle, String(run.seed), run.method, model,
        String(m.iterations),
        num(m.accuracy), num(m.recall), num(m.precision), num(m.f1),
        num(m.auc), num(m.mcc),
        num(fitTotal, 3), sources.get(model) ?? "",
        "", "", "", "", "",
      ]);
    }
  }
  for (const comparison of comparisons) {
    for (const cell of comparison.cells) {
      reportRows.push([
        "method_matrix", comparison.bundle, "", "", "", "",
        "", "", "", "", "", num(cell.meanMcc),
        "", "",
        cell.trainMethod, cell.testMethod,
        num(cell.ciLow), num(cell.ciHigh), String(cell.seeds),
      ]);
    }
  }

  const curveRows: string[][] = [];
  for (const run of runs) {
    for (const row of run.iterations) {
      curveRows.push([
        run.bundle, String(run.seed), run.method, row.model,
        String(row.iteration), String(row.trainRows), String(row.testRows),
        num(row.metrics.accuracy), num(row.metrics.recall),
        num(row.metrics.precision), num(row.metrics.f1),
        num(row.metrics.auc), num(row.metrics.mcc),
        num(row.fitMs, 3), row.aucSource, formatParams(row.params),
      ]);
    }
  }

  const reportPath = path.join(outDir, REPORT_FILE);
  const curvesPath = path.join(outDir, CURVES_FILE);
  fs.writeFileSync(reportPath, toCsv([REPORT_HEADER, ...reportRows]));
  fs.writeFileSync(curvesPath, toCsv([CURVES_HEADER, ...curveRows]));
  return { reportPath, curvesPath };
}

export function formatParams(params: Params): string {
  return Object.entries(params)
    .map(([key, value]) => `${key}=${value}`)
    .join(";");
}

function num(value: number, digits = 6): string {
  if (Number.isNaN(value)) return "";
  return value.toFixed(digits).replace(/0+$/, "").replace(/\.$/, "");
}

function toCsv(rows: string[][]): string {
  return rows.map((row) => row.join(",")).join("\n") + "\n";
}
