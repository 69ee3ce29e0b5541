/**
 * Complement naive Bayes. Weights per class come from the complement of
 * the class's feature mass, which keeps the estimates stable when one
 * class dwarfs the other. Features are min-max scaled to [0, 1] inside
 * the model (the method needs nonnegative inputs, and the raw columns
 * span wildly different magnitudes).
 */
import { Classifier } from "./classifier.js";

export interface CnbOptions {
  alpha: number;
}

export class ComplementNaiveBayes implements Classifier {
  private readonly alpha: number;
  private lo: number[] = [];
  private span: number[] = [];
  /** per class, per feature: -log of complement frequency */
  private weights: number[][] = [];
  private classes: number[] = [];

  constructor(opts: CnbOptions) {
    this.alpha = opts.alpha;
  }

  fit(rows: number[][], labels: number[]): void {
    if (rows.length === 0) throw new Error("cannot fit on zero rows");
    const nFeatures = rows[0].length;
    this.lo = new Array(nFeatures).fill(Infinity);
    const hi = new Array(nFeatures).fill(-Infinity);
    for (const row of rows) {
      for (let f = 0; f < nFeatures; f++) {
        if (row[f] < this.lo[f]) this.lo[f] = row[f];
        if (row[f] > hi[f]) hi[f] = row[f];
      }
    }
    this.span = hi.map((h, f) => (h > this.lo[f] ? h - this.lo[f] : 1));

    this.classes = [...new Set(labels)].sort((a, b) => a - b);
    const total = new Array<number>(nFeatures).fill(0);
    const perClass = new Map<number, number[]>(
      this.classes.map((c) => [c, new Array<number>(nFeatures).fill(0)]),
    );
    for (let i = 0; i < rows.length; i++) {
      const scaled = this.scale(rows[i]);
      const bucket = perClass.get(labels[i])!;
      for (let f = 0; f < nFeatures; f++) {
        total[f] += scaled[f];
        bucket[f] += scaled[f];
      }
    }
    this.weights = this.classes.map((c) => {
      const own = perClass.get(c)!;
      const comp = total.map((t, f) => this.alpha + t - own[f]);
      const mass = comp.reduce((a, b) => a + b, 0);
      return comp.map((v) => -Math.log(v / mass));
    });
  }

  predict(rows: number[][]): number[] {
    return rows.map((row) => {
      const jll = this.jointLogLikelihood(row);
      let best = 0;
      for (let c = 1; c < jll.length; c++) {
        if (jll[c] > jll[best]) best = c;
      }
      return this.classes[best];
    });
  }

  /** Margin of the positive class over the negative one. */
  scores(rows: number[][]): number[] {
    return rows.map((row) => {
      const jll = this.jointLogLikelihood(row);
      if (this.classes.length < 2) return jll[0];
      const pos = this.classes.indexOf(1);
      const neg = this.classes.indexOf(0);
      return jll[pos] - jll[neg];
    });
  }

  private jointLogLikelihood(row: number[]): number[] {
    if (this.weights.length === 0) throw new Error("predict before fit");
    const scaled = this.scale(row);
    return this.weights.map((w) => {
      let s = 0;
      for (let f = 0; f < scaled.length; f++) s += scaled[f] * w[f];
      return s;
    });
  }

  private scale(row: number[]): number[] {
    return row.map((v, f) => Math.max(0, (v - this.lo[f]) / this.span[f]));
  }
}
