#!/usr/bin/env node
/**
 * mleval: run the classifier benchmark over one or more dataset bundles.
 *
 * Each --bundles argument is either a single bundle directory (iterative
 * evaluation of the selected models) or a comparison directory produced by
 * the simulator's compare-methods command (boosted-tree transfer matrix).
 * Results land in --out as report.csv and curves.csv.
 */
import * as fs from "node:fs";
import * as path from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import {
  isComparisonSet,
  loadBundle,
  loadComparisonSet,
} from "./bundle.js";
import { compareMethods, iterativeEval } from "./evaluate.js";
import { DEFAULT_MODELS, MODEL_SPECS } from "./models/index.js";
import {
  BundleRunResult,
  ComparisonRunResult,
  writeReports,
} from "./report.js";

export const DEFAULT_SEEDS = [11, 23, 37, 58, 71];

interface CliArgs {
  bundles: string[];
  models: string;
  enableSvm: boolean;
  out: string;
  seeds: string;
}

export async function main(argv: string[]): Promise<number> {
  let usageError = false;
  const parser = yargs(argv)
    .scriptName("mleval")
    .usage("$0 --bundles DIR... --models rf,dt,cnb,kmeans,xgb --out DIR")
    .option("bundles", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "bundle or comparison directories",
    })
    .option("models", {
      type: "string",
      default: DEFAULT_MODELS.join(","),
      describe: "comma-separated model list",
    })
    .option("enable-svm", {
      type: "boolean",
      default: false,
      describe: "allow the svm model (slow on large bundles)",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output directory for report.csv and curves.csv",
    })
    .option("seeds", {
      type: "string",
      default: DEFAULT_SEEDS.join(","),
      describe: "comma-separated evaluation seeds",
    })
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      usageError = true;
      process.stderr.write(`${msg ?? err?.message}\n`);
    });

  const args = (await parser.parse()) as unknown as CliArgs;
  if (usageError) return 2;

  try {
    const models = args.models.split(",").map((m) => m.trim()).filter(Boolean);
    for (const model of models) {
      if (!(model in MODEL_SPECS)) {
        throw new Error(
          `unknown model "${model}"; known: ${Object.keys(MODEL_SPECS).join(", ")}`,
        );
      }
    }
    if (models.includes("svm") && !args.enableSvm) {
      throw new Error("model svm requires --enable-svm");
    }
    const seedTokens = args.seeds
      .split(",")
      .map((s) => s.trim())
      .filter((s) => s !== "");
    if (seedTokens.length === 0) {
      throw new Error("--seeds parsed to an empty list");
    }
    const seeds = seedTokens.map((s) => {
      const v = Number(s);
      if (!Number.isInteger(v)) {
        throw new Error(`--seeds: "${s}" is not an integer`);
      }
      return v;
    });

    const runs: BundleRunResult[] = [];
    const comparisons: ComparisonRunResult[] = [];
    for (const dir of args.bundles) {
      if (!fs.existsSync(path.join(dir, "manifest.json"))) {
        throw new Error(`${dir}: no manifest.json; not a bundle directory`);
      }
      if (isComparisonSet(dir)) {
        const set = loadComparisonSet(dir);
        process.stderr.write(
          `comparison set ${dir}: ${set.methods.length} methods x ${set.seeds.length} seeds\n`,
        );
        comparisons.push({
          bundle: path.basename(dir),
          cells: compareMethods(set, seeds[0]),
        });
      } else {
        const bundle = loadBundle(dir);
        const method = String(bundle.manifest["method"] ?? "");
        process.stderr.write(
          `bundle ${dir}: ${bundle.events.length} events, models ${models.join(",")}\n`,
        );
        for (const seed of seeds) {
          runs.push({
            bundle: path.basename(dir),
            seed,
            method,
            iterations: iterativeEval(bundle, models, seed),
          });
        }
      }
    }

    const { reportPath, curvesPath } = writeReports(args.out, runs, comparisons);
    process.stderr.write(`wrote ${reportPath} and ${curvesPath}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("mleval")) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
