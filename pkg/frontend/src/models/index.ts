/**
 * Model registry. Grid axes are small on purpose: every configuration is
 * cross-validated per training window, and the windows arrive in a loop.
 */
import { ModelSpec, gridOf } from "./classifier.js";
import { DecisionTree } from "./tree.js";
import { RandomForest } from "./forest.js";
import { GradientBoost } from "./boost.js";
import { ComplementNaiveBayes } from "./cnb.js";
import { KMeansClassifier } from "./kmeans.js";
import { LinearSvm } from "./svm.js";

export const MODEL_SPECS: Record<string, ModelSpec> = {
  dt: {
    name: "dt",
    supervised: true,
    scored: true,
    grid: gridOf({ maxDepth: [4, 8, 16], minLeaf: [1, 5] }),
    build: (p) => new DecisionTree({ maxDepth: p.maxDepth, minLeaf: p.minLeaf }),
  },
  rf: {
    name: "rf",
    supervised: true,
    scored: true,
    grid: gridOf({ trees: [50], maxDepth: [8, 16] }),
    build: (p, seed) =>
      new RandomForest({ trees: p.trees, maxDepth: p.maxDepth, minLeaf: 1, seed }),
  },
  xgb: {
    name: "xgb",
    supervised: true,
    scored: true,
    grid: gridOf({ rounds: [50], maxDepth: [3], eta: [0.1, 0.3] }),
    build: (p) =>
      new GradientBoost({
        rounds: p.rounds,
        maxDepth: p.maxDepth,
        eta: p.eta,
        lambda: 1,
      }),
  },
  cnb: {
    name: "cnb",
    supervised: true,
    scored: true,
    grid: gridOf({ alpha: [0.1, 1.0] }),
    build: (p) => new ComplementNaiveBayes({ alpha: p.alpha }),
  },
  kmeans: {
    name: "kmeans",
    supervised: false,
    scored: false,
    grid: gridOf({ k: [2, 3, 4] }),
    build: (p, seed) => new KMeansClassifier({ k: p.k, seed }),
  },
  svm: {
    name: "svm",
    supervised: true,
    scored: true,
    grid: gridOf({ lambda: [1e-2, 1e-4] }),
    build: (p, seed) => new LinearSvm({ lambda: p.lambda, seed }),
  },
};

/** Models included when the caller does not pass an explicit list. */
export const DEFAULT_MODELS = ["rf", "dt", "cnb", "kmeans", "xgb"];

export * from "./classifier.js";
export { DecisionTree } from "./tree.js";
export { RandomForest } from "./forest.js";
export { GradientBoost } from "./boost.js";
export { ComplementNaiveBayes } from "./cnb.js";
export { KMeansClassifier } from "./kmeans.js";
export { LinearSvm } from "./svm.js";
