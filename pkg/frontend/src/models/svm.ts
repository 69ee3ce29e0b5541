/**
 * Linear SVM trained with Pegasos (stochastic subgradient on the hinge
 * loss). Standardized inputs, bias via a constant appended feature. Kept
 * behind an opt-in flag: on bigger bundles the epoch count needed for a
 * stable margin makes it by far the slowest supervised model here.
 */
import { Classifier } from "./classifier.js";
import { Rng } from "../rng.js";

export interface SvmOptions {
  lambda: number;
  seed: number;
  epochs?: number;
}

export class LinearSvm implements Classifier {
  private w: number[] = [];
  private mean: number[] = [];
  private sd: number[] = [];
  private readonly opts: SvmOptions;

  constructor(opts: SvmOptions) {
    this.opts = opts;
  }

  fit(rows: number[][], labels: number[]): void {
    if (rows.length === 0) throw new Error("cannot fit on zero rows");
    const nFeatures = rows[0].length;
    this.mean = new Array(nFeatures).fill(0);
    this.sd = new Array(nFeatures).fill(0);
    for (const row of rows) {
      for (let f = 0; f < nFeatures; f++) this.mean[f] += row[f];
    }
    for (let f = 0; f < nFeatures; f++) this.mean[f] /= rows.length;
    for (const row of rows) {
      for (let f = 0; f < nFeatures; f++) {
        const d = row[f] - this.mean[f];
        this.sd[f] += d * d;
      }
    }
    for (let f = 0; f < nFeatures; f++) {
      this.sd[f] = Math.sqrt(this.sd[f] / rows.length) || 1;
    }

    const X = rows.map((row) => this.scale(row));
    const y = labels.map((l) => (l === 1 ? 1 : -1));
    const lambda = this.opts.lambda;
    const epochs = this.opts.epochs ?? 20;
    const rng = new Rng(this.opts.seed);
    this.w = new Array<number>(nFeatures + 1).fill(0);
    let t = 0;
    for (let epoch = 0; epoch < epochs; epoch++) {
      for (let step = 0; step < rows.length; step++) {
        t++;
        const i = rng.int(rows.length);
        const eta = 1 / (lambda * t);
        const margin = y[i] * dot(this.w, X[i]);
        for (let f = 0; f < this.w.length; f++) {
          this.w[f] *= 1 - eta * lambda;
        }
        if (margin < 1) {
          for (let f = 0; f < X[i].length; f++) {
            this.w[f] += eta * y[i] * X[i][f];
          }
        }
      }
    }
  }

  predict(rows: number[][]): number[] {
    return this.scores(rows).map((m) => (m > 0 ? 1 : 0));
  }

  /** Signed distance to the separating hyperplane (unnormalized). */
  scores(rows: number[][]): number[] {
    if (this.w.length === 0) throw new Error("predict before fit");
    return rows.map((row) => dot(this.w, this.scale(row)));
  }

  private scale(row: number[]): number[] {
    const out = row.map((v, f) => (v - this.mean[f]) / this.sd[f]);
    out.push(1); // bias term
    return out;
  }
}

function dot(w: number[], x: number[]): number {
  let total = 0;
  for (let f = 0; f < x.length; f++) total += w[f] * x[f];
  return total;
}
