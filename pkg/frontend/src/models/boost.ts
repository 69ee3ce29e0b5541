/**
 * Gradient-boosted trees with logistic loss and second-order (Newton)
 * leaf weights, the standard regularized boosting recipe:
 *
 *   gain = GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)
 *   leaf = -G / (H + lambda)
 *
 * Exact greedy split search: every feature is argsorted once per fit and
 * each node scans those orders through a membership mask, so growing a
 * depth-d tree costs O(d * features * n) after the initial sorts. No row
 * or column sampling; a fit is fully deterministic for a given training
 * set.
 */
import { Classifier } from "./classifier.js";

interface BoostLeaf {
  kind: "leaf";
  weight: number;
}

interface BoostSplit {
  kind: "split";
  feature: number;
  threshold: number;
  left: BoostNode;
  right: BoostNode;
}

type BoostNode = BoostLeaf | BoostSplit;

export interface BoostOptions {
  rounds: number;
  maxDepth: number;
  eta: number;
  lambda: number;
}

export class GradientBoost implements Classifier {
  private trees: BoostNode[] = [];
  private readonly opts: BoostOptions;

  constructor(opts: BoostOptions) {
    this.opts = opts;
  }

  fit(rows: number[][], labels: number[]): void {
    if (rows.length === 0) throw new Error("cannot fit on zero rows");
    const n = rows.length;
    const nFeatures = rows[0].length;
    // one argsort per feature, reused by every node of every tree
    const sorted: Int32Array[] = [];
    for (let f = 0; f < nFeatures; f++) {
      const order = Int32Array.from({ length: n }, (_, i) => i);
      sorted.push(order.sort((a, b) => rows[a][f] - rows[b][f]));
    }

    this.trees = [];
    const margin = new Float64Array(n);
    const g = new Float64Array(n);
    const h = new Float64Array(n);
    const member = new Uint8Array(n);
    for (let round = 0; round < this.opts.rounds; round++) {
      for (let i = 0; i < n; i++) {
        const p = 1 / (1 + Math.exp(-margin[i]));
        g[i] = p - labels[i];
        h[i] = p * (1 - p);
      }
      member.fill(1);
      const tree = this.grow(rows, sorted, g, h, member, n, 0);
      this.trees.push(tree);
      for (let i = 0; i < n; i++) {
        margin[i] += this.opts.eta * evalNode(tree, rows[i]);
      }
    }
  }

  predict(rows: number[][]): number[] {
    return this.scores(rows).map((m) => (m > 0 ? 1 : 0));
  }

  /** Additive margin; sigmoid(margin) would be the probability. */
  scores(rows: number[][]): number[] {
    if (this.trees.length === 0) throw new Error("predict before fit");
    return rows.map((row) => {
      let total = 0;
      for (const tree of this.trees) total += evalNode(tree, row);
      return this.opts.eta * total;
    });
  }

  /**
   * Grow one tree node over the rows flagged in `member` (size `count`).
   * The membership mask is consumed: children call with disjoint masks.
   */
  private grow(
    rows: number[][],
    sorted: Int32Array[],
    g: Float64Array,
    h: Float64Array,
    member: Uint8Array,
    count: number,
    depth: number,
  ): BoostNode {
    let G = 0;
    let H = 0;
    for (let i = 0; i < member.length; i++) {
      if (member[i]) {
        G += g[i];
        H += h[i];
      }
    }
    const lambda = this.opts.lambda;
    if (depth >= this.opts.maxDepth || count < 2) {
      return { kind: "leaf", weight: -G / (H + lambda) };
    }
    const base = (G * G) / (H + lambda);
    let bestGain = 1e-12;
    let bestFeature = -1;
    let bestThreshold = 0;
    for (let f = 0; f < sorted.length; f++) {
      const order = sorted[f];
      let GL = 0;
      let HL = 0;
      let seen = 0;
      let prevValue = NaN;
      for (let k = 0; k < order.length; k++) {
        const i = order[k];
        if (!member[i]) continue;
        const value = rows[i][f];
        if (seen > 0 && value !== prevValue) {
          const GR = G - GL;
          const HR = H - HL;
          const gain =
            (GL * GL) / (HL + lambda) + (GR * GR) / (HR + lambda) - base;
          if (gain > bestGain + 1e-12) {
            bestGain = gain;
            bestFeature = f;
            bestThreshold = (prevValue + value) / 2;
          }
        }
        GL += g[i];
        HL += h[i];
        seen++;
        prevValue = value;
      }
    }
    if (bestFeature < 0) {
      return { kind: "leaf", weight: -G / (H + lambda) };
    }
    const leftMember = new Uint8Array(member.length);
    let leftCount = 0;
    for (let i = 0; i < member.length; i++) {
      if (member[i] && rows[i][bestFeature] <= bestThreshold) {
        leftMember[i] = 1;
        member[i] = 0;
        leftCount++;
      }
    }
    return {
      kind: "split",
      feature: bestFeature,
      threshold: bestThreshold,
      left: this.grow(rows, sorted, g, h, leftMember, leftCount, depth + 1),
      right: this.grow(rows, sorted, g, h, member, count - leftCount, depth + 1),
    };
  }
}

function evalNode(node: BoostNode, row: number[]): number {
  while (node.kind === "split") {
    node = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return node.weight;
}
