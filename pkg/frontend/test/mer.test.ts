import { describe, expect, it } from "vitest";

import { isPunctuationUnit, levenshtein, sequenceMer } from "../src/mer.js";

describe("levenshtein", () => {
  it("matches hand-checked distances", () => {
    expect(levenshtein([], [])).toBe(0);
    expect(levenshtein(["A"], [])).toBe(1);
    expect(levenshtein(["A", "B", "C"], ["A", "X", "C"])).toBe(1);
    expect(levenshtein(["A", "B"], ["B", "A"])).toBe(2);
    expect(levenshtein(["A"], ["X", "Y", "Z"])).toBe(3);
  });
});

describe("sequenceMer", () => {
  it("is 0 iff the sequences match", () => {
    expect(sequenceMer(["A", "B"], ["A", "B"])).toBe(0);
    expect(sequenceMer(["A", "B"], ["A", "C"])).toBeGreaterThan(0);
  });

  it("normalizes by gold length and clips at 1", () => {
    expect(sequenceMer(["A", "B", "C"], ["A", "X", "C"])).toBeCloseTo(1 / 3, 12);
    expect(sequenceMer(["A"], ["X", "Y", "Z"])).toBe(1);
  });

  it("excludes punctuation-only units on both sides", () => {
    expect(sequenceMer(["A", ".", "B"], ["A", "B", "?!"])).toBe(0);
  });
});

describe("isPunctuationUnit", () => {
  it.each([
    [".", true],
    ["?!", true],
    ["$", true],
    ["a.", false],
    ["NOM", false],
    ["", false],
  ])("%s -> %s", (unit, expected) => {
    expect(isPunctuationUnit(unit as string)).toBe(expected);
  });
});
