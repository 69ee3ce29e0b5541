/** Common shape every model implements. */

export type Params = Record<string, number>;

export interface Classifier {
  fit(rows: number[][], labels: number[]): void;
  /** Hard 0/1 predictions. */
  predict(rows: number[][]): number[];
  /**
   * Ranking scores for AUC, higher means more attack-like. Models without
   * a usable score leave this undefined and AUC falls back to the hard
   * labels (a two-point ROC).
   */
  scores?(rows: number[][]): number[];
}

export interface ModelSpec {
  name: string;
  supervised: boolean;
  /** whether scores() exists and is meaningful */
  scored: boolean;
  grid: Params[];
  build(params: Params, seed: number): Classifier;
}

/** Cartesian product of per-key candidate lists, in key order. */
export function gridOf(axes: Record<string, number[]>): Params[] {
  let combos: Params[] = [{}];
  for (const [key, values] of Object.entries(axes)) {
    const next: Params[] = [];
    for (const combo of combos) {
      for (const value of values) {
        next.push({ ...combo, [key]: value });
      }
    }
    combos = next;
  }
  return combos;
}
