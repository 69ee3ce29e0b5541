/**
 * Configuration selection by k-fold cross-validated MCC on the training
 * window. Folds come from one seeded shuffle; a fold whose training part
 * is single-class contributes nothing. Ties keep the earliest grid entry,
 * and a one-point grid skips validation entirely.
 */
import { ModelSpec, Params } from "./models/index.js";
import { confusion, mcc } from "./metrics.js";
import { Rng, deriveSeed } from "./rng.js";

export interface GridResult {
  params: Params;
  /** mean held-out MCC, NaN when no fold was scorable or the grid is a point */
  cvScore: number;
}

export const CV_FOLDS = 3;

export function selectParams(
  spec: ModelSpec,
  rows: number[][],
  labels: number[],
  seed: number,
): GridResult {
  if (spec.grid.length === 1) {
    return { params: spec.grid[0], cvScore: NaN };
  }
  const folds = foldIndices(rows.length, CV_FOLDS, deriveSeed(seed, `${spec.name}/cv`));
  let best: GridResult | null = null;
  for (const params of spec.grid) {
    const scores: number[] = [];
    for (let f = 0; f < folds.length; f++) {
      const testIdx = folds[f];
      const trainIdx = folds.flatMap((fold, g) => (g === f ? [] : fold));
      if (trainIdx.length === 0 || testIdx.length === 0) continue;
      const yTrain = trainIdx.map((i) => labels[i]);
      if (spec.supervised && new Set(yTrain).size < 2) continue;
      const model = spec.build(params, deriveSeed(seed, `${spec.name}/fold${f}`));
      model.fit(trainIdx.map((i) => rows[i]), yTrain);
      const yPred = model.predict(testIdx.map((i) => rows[i]));
      scores.push(mcc(confusion(testIdx.map((i) => labels[i]), yPred)));
    }
    const score = scores.length === 0 ? NaN : avg(scores);
    if (
      best === null ||
      (Number.isNaN(best.cvScore) && !Number.isNaN(score)) ||
      (!Number.isNaN(score) && score > best.cvScore)
    ) {
      best = { params, cvScore: score };
    }
  }
  return best ?? { params: spec.grid[0], cvScore: NaN };
}

function foldIndices(n: number, k: number, seed: number): number[][] {
  const order = new Rng(seed).shuffle(Array.from({ length: n }, (_, i) => i));
  const folds: number[][] = Array.from({ length: Math.min(k, n) }, () => []);
  order.forEach((idx, pos) => folds[pos % folds.length].push(idx));
  return folds;
}

function avg(values: number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}
