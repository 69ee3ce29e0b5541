/**
 * Random forest: bagged CART trees with per-node feature subsampling.
 * Scores are averaged leaf probabilities; prediction thresholds at 0.5.
 */
import { Classifier } from "./classifier.js";
import { DecisionTree } from "./tree.js";
import { Rng } from "../rng.js";

export interface ForestOptions {
  trees: number;
  maxDepth: number;
  minLeaf: number;
  seed: number;
}

export class RandomForest implements Classifier {
  private members: DecisionTree[] = [];
  private readonly opts: ForestOptions;

  constructor(opts: ForestOptions) {
    this.opts = opts;
  }

  fit(rows: number[][], labels: number[]): void {
    if (rows.length === 0) throw new Error("cannot fit a forest on zero rows");
    const mtry = Math.max(1, Math.round(Math.sqrt(rows[0].length)));
    const rng = new Rng(this.opts.seed);
    this.members = [];
    for (let t = 0; t < this.opts.trees; t++) {
      const sampleRows: number[][] = [];
      const sampleLabels: number[] = [];
      for (let i = 0; i < rows.length; i++) {
        const j = rng.int(rows.length);
        sampleRows.push(rows[j]);
        sampleLabels.push(labels[j]);
      }
      const tree = new DecisionTree({
        maxDepth: this.opts.maxDepth,
        minLeaf: this.opts.minLeaf,
        mtry,
        rng,
      });
      tree.fit(sampleRows, sampleLabels);
      this.members.push(tree);
    }
  }

  predict(rows: number[][]): number[] {
    return this.scores(rows).map((p) => (p > 0.5 ? 1 : 0));
  }

  scores(rows: number[][]): number[] {
    if (this.members.length === 0) throw new Error("predict before fit");
    const acc = new Array<number>(rows.length).fill(0);
    for (const tree of this.members) {
      const probs = tree.leafProbs(rows);
      for (let i = 0; i < rows.length; i++) acc[i] += probs[i];
    }
    return acc.map((total) => total / this.members.length);
  }
}
