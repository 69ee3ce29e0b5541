export * from "./rng.js";
export * from "./unified2.js";
export * from "./bundle.js";
export * from "./features.js";
export * from "./metrics.js";
export * from "./models/index.js";
export * from "./gridsearch.js";
export * from "./evaluate.js";
export * from "./report.js";
