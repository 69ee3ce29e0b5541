import { describe, expect, it } from "vitest";

import { Rng, deriveSeed } from "../src/rng.js";

describe("Rng", () => {
  it("repeats the same stream for the same seed", () => {
    const a = new Rng(42);
    const b = new Rng(42);
    const streamA = Array.from({ length: 20 }, () => a.next());
    const streamB = Array.from({ length: 20 }, () => b.next());
    expect(streamA).toEqual(streamB);
  });

  it("diverges for different seeds", () => {
    const a = new Rng(1);
    const b = new Rng(2);
    expect(a.next()).not.toBe(b.next());
  });

  it("stays inside [0, 1) and int stays inside [0, n)", () => {
    const rng = new Rng(7);
    for (let i = 0; i < 1000; i++) {
      const x = rng.next();
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThan(1);
      const k = rng.int(13);
      expect(k).toBeGreaterThanOrEqual(0);
      expect(k).toBeLessThan(13);
      expect(Number.isInteger(k)).toBe(true);
    }
  });

  it("shuffle permutes without losing elements", () => {
    const rng = new Rng(3);
    const input = Array.from({ length: 50 }, (_, i) => i);
    const shuffled = rng.shuffle([...input]);
    expect(shuffled).not.toEqual(input); // astronomically unlikely to match
    expect([...shuffled].sort((a, b) => a - b)).toEqual(input);
    // same seed, same permutation
    expect(new Rng(3).shuffle([...input])).toEqual(shuffled);
  });
});

describe("deriveSeed", () => {
  it("is deterministic in both arguments", () => {
    expect(deriveSeed(11, "rf")).toBe(deriveSeed(11, "rf"));
    expect(deriveSeed(11, "rf")).not.toBe(deriveSeed(12, "rf"));
    expect(deriveSeed(11, "rf")).not.toBe(deriveSeed(11, "dt"));
  });

  it("yields valid unsigned 32-bit seeds", () => {
    for (const tag of ["a", "iter5", "kmeans/fold2"]) {
      const s = deriveSeed(99, tag);
      expect(s).toBeGreaterThanOrEqual(0);
      expect(s).toBeLessThanOrEqual(0xffffffff);
      expect(Number.isInteger(s)).toBe(true);
    }
  });
});
