/**
 * K-means used as a classifier: cluster the training rows, give each
 * cluster the majority label of its members, and label test rows by their
 * nearest centroid. Rows are clustered as-is; the point of including this
 * model is to measure what plain distance structure recovers, and on alert
 * data distance is dominated by the id-like columns.
 */
import { Classifier } from "./classifier.js";
import { Rng } from "../rng.js";

export interface KMeansOptions {
  k: number;
  seed: number;
  maxIter?: number;
}

export class KMeansClassifier implements Classifier {
  private centroids: number[][] = [];
  private clusterLabels: number[] = [];
  private readonly opts: KMeansOptions;

  constructor(opts: KMeansOptions) {
    this.opts = opts;
  }

  fit(rows: number[][], labels: number[]): void {
    if (rows.length === 0) throw new Error("cannot fit on zero rows");
    const k = Math.min(this.opts.k, rows.length);
    const rng = new Rng(this.opts.seed);
    this.centroids = plusPlusInit(rows, k, rng);

    const maxIter = this.opts.maxIter ?? 100;
    let assignment = new Array<number>(rows.length).fill(-1);
    for (let iter = 0; iter < maxIter; iter++) {
      const next = rows.map((row) => this.nearest(row));
      let changed = false;
      for (let i = 0; i < rows.length; i++) {
        if (next[i] !== assignment[i]) {
          changed = true;
          break;
        }
      }
      assignment = next;
      if (!changed && iter > 0) break;
      // recompute centroids; empty clusters keep their previous position
      const sums = this.centroids.map((c) => new Array<number>(c.length).fill(0));
      const counts = new Array<number>(k).fill(0);
      for (let i = 0; i < rows.length; i++) {
        const c = assignment[i];
        counts[c]++;
        for (let f = 0; f < rows[i].length; f++) sums[c][f] += rows[i][f];
      }
      for (let c = 0; c < k; c++) {
        if (counts[c] === 0) continue;
        this.centroids[c] = sums[c].map((s) => s / counts[c]);
      }
    }

    // majority vote per cluster; an exact tie or an empty cluster stays 0
    this.clusterLabels = new Array<number>(k).fill(0);
    const pos = new Array<number>(k).fill(0);
    const counts = new Array<number>(k).fill(0);
    for (let i = 0; i < rows.length; i++) {
      counts[assignment[i]]++;
      pos[assignment[i]] += labels[i];
    }
    for (let c = 0; c < k; c++) {
      if (counts[c] > 0 && pos[c] * 2 > counts[c]) this.clusterLabels[c] = 1;
    }
  }

  predict(rows: number[][]): number[] {
    if (this.centroids.length === 0) throw new Error("predict before fit");
    return rows.map((row) => this.clusterLabels[this.nearest(row)]);
  }

  private nearest(row: number[]): number {
    let best = 0;
    let bestDist = Infinity;
    for (let c = 0; c < this.centroids.length; c++) {
      const d = sqDist(row, this.centroids[c]);
      if (d < bestDist) {
        bestDist = d;
        best = c;
      }
    }
    return best;
  }
}

/** k-means++ seeding: spread the initial centroids by squared distance. */
function plusPlusInit(rows: number[][], k: number, rng: Rng): number[][] {
  const centroids: number[][] = [rows[rng.int(rows.length)].slice()];
  while (centroids.length < k) {
    const dists = rows.map((row) =>
      Math.min(...centroids.map((c) => sqDist(row, c))),
    );
    const totalMass = dists.reduce((a, b) => a + b, 0);
    if (totalMass === 0) {
      centroids.push(rows[rng.int(rows.length)].slice());
      continue;
    }
    let draw = rng.next() * totalMass;
    let pick = rows.length - 1;
    for (let i = 0; i < rows.length; i++) {
      draw -= dists[i];
      if (draw <= 0) {
        pick = i;
        break;
      }
    }
    centroids.push(rows[pick].slice());
  }
  return centroids;
}

function sqDist(a: number[], b: number[]): number {
  let total = 0;
  for (let f = 0; f < a.length; f++) {
    const d = a[f] - b[f];
    total += d * d;
  }
  return total;
}
