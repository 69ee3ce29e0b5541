import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // model training on the committed bundles is CPU-bound
    testTimeout: 600_000,
    hookTimeout: 600_000,
  },
});
