/**
 * CART decision tree with Gini impurity and exact threshold search.
 *
 * Splits are midpoints between adjacent distinct values; ties in gain go to
 * the lowest feature index, then the lowest threshold, so a fitted tree is
 * a pure function of its inputs. An optional per-node feature subsample
 * (mtry) turns the same code into a forest member.
 */
import { Classifier } from "./classifier.js";
import { Rng } from "../rng.js";

interface Leaf {
  kind: "leaf";
  /** fraction of positive training rows in this leaf */
  prob: number;
}

interface Split {
  kind: "split";
  feature: number;
  threshold: number;
  left: TreeNode;
  right: TreeNode;
}

type TreeNode = Leaf | Split;

export interface TreeOptions {
  maxDepth: number;
  minLeaf: number;
  /** features considered per node; 0 or missing means all */
  mtry?: number;
  rng?: Rng;
}

export class DecisionTree implements Classifier {
  private root: TreeNode | null = null;
  private readonly opts: TreeOptions;

  constructor(opts: TreeOptions) {
    this.opts = opts;
  }

  fit(rows: number[][], labels: number[]): void {
    if (rows.length === 0) throw new Error("cannot fit a tree on zero rows");
    const idx = rows.map((_, i) => i);
    this.root = this.grow(rows, labels, idx, 0);
  }

  predict(rows: number[][]): number[] {
    return this.leafProbs(rows).map((p) => (p > 0.5 ? 1 : 0));
  }

  scores(rows: number[][]): number[] {
    return this.leafProbs(rows);
  }

  leafProbs(rows: number[][]): number[] {
    if (this.root === null) throw new Error("predict before fit");
    return rows.map((row) => {
      let node = this.root as TreeNode;
      while (node.kind === "split") {
        node = row[node.feature] <= node.threshold ? node.left : node.right;
      }
      return node.prob;
    });
  }

  private grow(
    rows: number[][],
    labels: number[],
    idx: number[],
    depth: number,
  ): TreeNode {
    const positives = idx.reduce((acc, i) => acc + labels[i], 0);
    if (
      depth >= this.opts.maxDepth ||
      idx.length < 2 * this.opts.minLeaf ||
      positives === 0 ||
      positives === idx.length
    ) {
      return { kind: "leaf", prob: positives / idx.length };
    }
    const best = this.bestSplit(rows, labels, idx);
    if (best === null) {
      return { kind: "leaf", prob: positives / idx.length };
    }
    const leftIdx: number[] = [];
    const rightIdx: number[] = [];
    for (const i of idx) {
      (rows[i][best.feature] <= best.threshold ? leftIdx : rightIdx).push(i);
    }
    return {
      kind: "split",
      feature: best.feature,
      threshold: best.threshold,
      left: this.grow(rows, labels, leftIdx, depth + 1),
      right: this.grow(rows, labels, rightIdx, depth + 1),
    };
  }

  private bestSplit(rows: number[][], labels: number[], idx: number[]) {
    const nFeatures = rows[0].length;
    let candidates: number[];
    if (this.opts.mtry && this.opts.mtry < nFeatures) {
      const all = Array.from({ length: nFeatures }, (_, f) => f);
      const rng = this.opts.rng ?? new Rng(0);
      candidates = rng.shuffle(all).slice(0, this.opts.mtry).sort((a, b) => a - b);
    } else {
      candidates = Array.from({ length: nFeatures }, (_, f) => f);
    }

    const total = idx.length;
    const totalPos = idx.reduce((acc, i) => acc + labels[i], 0);
    const parentGini = giniOf(totalPos, total);
    let best: { feature: number; threshold: number; gain: number } | null = null;

    for (const feature of candidates) {
      const order = [...idx].sort((a, b) => rows[a][feature] - rows[b][feature]);
      let leftN = 0;
      let leftPos = 0;
      for (let k = 0; k < order.length - 1; k++) {
        leftN++;
        leftPos += labels[order[k]];
        const a = rows[order[k]][feature];
        const b = rows[order[k + 1]][feature];
        if (a === b) continue;
        const rightN = total - leftN;
        if (leftN < this.opts.minLeaf || rightN < this.opts.minLeaf) continue;
        const rightPos = totalPos - leftPos;
        const weighted =
          (leftN / total) * giniOf(leftPos, leftN) +
          (rightN / total) * giniOf(rightPos, rightN);
        const gain = parentGini - weighted;
        if (gain <= 1e-12) continue;
        const threshold = (a + b) / 2;
        if (
          best === null ||
          gain > best.gain + 1e-12 ||
          (Math.abs(gain - best.gain) <= 1e-12 &&
            (feature < best.feature ||
              (feature === best.feature && threshold < best.threshold)))
        ) {
          best = { feature, threshold, gain };
        }
      }
    }
    return best;
  }
}

function giniOf(pos: number, n: number): number {
  if (n === 0) return 0;
  const p = pos / n;
  return 2 * p * (1 - p);
}
