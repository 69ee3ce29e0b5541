/**
 * Binary classification metrics.
 *
 * Zero-denominator cases return 0 rather than NaN so downstream ranking
 * and CSV output never have to special-case them; AUC returns 0.5 when a
 * class is absent because no ranking information exists.
 */

export interface ConfusionCounts {
  tp: number;
  tn: number;
  fp: number;
  fn: number;
}

export interface MetricScores {
  accuracy: number;
  recall: number;
  precision: number;
  f1: number;
  auc: number;
  mcc: number;
}

export function confusion(yTrue: number[], yPred: number[]): ConfusionCounts {
  if (yTrue.length !== yPred.length) {
    throw new Error(`length mismatch: ${yTrue.length} labels, ${yPred.length} predictions`);
  }
  const c = { tp: 0, tn: 0, fp: 0, fn: 0 };
  for (let i = 0; i < yTrue.length; i++) {
    if (yTrue[i] === 1) {
      if (yPred[i] === 1) c.tp++;
      else c.fn++;
    } else {
      if (yPred[i] === 1) c.fp++;
      else c.tn++;
    }
  }
  return c;
}

export function accuracy(c: ConfusionCounts): number {
  const n = c.tp + c.tn + c.fp + c.fn;
  return n === 0 ? 0 : (c.tp + c.tn) / n;
}

export function recall(c: ConfusionCounts): number {
  return ratio(c.tp, c.tp + c.fn);
}

export function precision(c: ConfusionCounts): number {
  return ratio(c.tp, c.tp + c.fp);
}

export function f1(c: ConfusionCounts): number {
  return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
}

export function mcc(c: ConfusionCounts): number {
  const num = c.tp * c.tn - c.fp * c.fn;
  const den = Math.sqrt(
    (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn),
  );
  return den === 0 ? 0 : num / den;
}

/**
 * Area under the ROC curve via the rank statistic: average ranks over the
 * pooled scores (ties share their mean rank), then
 * (rankSumPos - nPos(nPos+1)/2) / (nPos * nNeg).
 * Works for hard 0/1 predictions too, where it equals the two-point ROC.
 */
export function rocAuc(yTrue: number[], scores: number[]): number {
  if (yTrue.length !== scores.length) {
    throw new Error(`length mismatch: ${yTrue.length} labels, ${scores.length} scores`);
  }
  const nPos = yTrue.filter((y) => y === 1).length;
  const nNeg = yTrue.length - nPos;
  if (nPos === 0 || nNeg === 0) return 0.5;

  const order = yTrue.map((_, i) => i).sort((a, b) => scores[a] - scores[b]);
  const ranks = new Array<number>(yTrue.length);
  let i = 0;
  while (i < order.length) {
    let j = i;
    while (j + 1 < order.length && scores[order[j + 1]] === scores[order[i]]) j++;
    const mean = (i + j + 2) / 2; // ranks are 1-based
    for (let k = i; k <= j; k++) ranks[order[k]] = mean;
    i = j + 1;
  }
  let rankSum = 0;
  for (let k = 0; k < yTrue.length; k++) {
    if (yTrue[k] === 1) rankSum += ranks[k];
  }
  return (rankSum - (nPos * (nPos + 1)) / 2) / (nPos * nNeg);
}

export function allMetrics(
  yTrue: number[],
  yPred: number[],
  scores: number[],
): MetricScores {
  const c = confusion(yTrue, yPred);
  return {
    accuracy: accuracy(c),
    recall: recall(c),
    precision: precision(c),
    f1: f1(c),
    auc: rocAuc(yTrue, scores),
    mcc: mcc(c),
  };
}

function ratio(num: number, den: number): number {
  return den === 0 ? 0 : num / den;
}
