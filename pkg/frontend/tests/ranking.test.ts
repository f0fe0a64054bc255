import { describe, expect, it } from "vitest";

import type { OccamTask } from "../src/api";
import { RankingState, isPermutation } from "../src/ranking";

function makeTask(): OccamTask {
  return {
    task_id: "task-1",
    X: [0, 1, 2, 3, 4],
    y: [0.1, 0.3, -0.2, 0.4, 0.0],
    display_grid: [0, 1, 2, 3, 4, 5],
    curves: Array.from({ length: 7 }, (_, i) => ({
      position: i + 1,
      curve: [i, i, i, i, i, i],
    })),
    shuffle_token: "tok",
  };
}

describe("isPermutation", () => {
  it("accepts exactly the permutations of 1..n", () => {
    expect(isPermutation([3, 1, 2, 7, 5, 4, 6], 7)).toBe(true);
    expect(isPermutation([1, 2, 3, 4, 5, 6, 6], 7)).toBe(false); // duplicate
    expect(isPermutation([0, 1, 2, 3, 4, 5, 6], 7)).toBe(false); // out of range
    expect(isPermutation([1, 2, 3, 4, 5, 6], 7)).toBe(false); // short
    expect(isPermutation([1.5, 2, 3, 4, 5, 6, 6.5], 7)).toBe(false);
  });
});

describe("RankingState", () => {
  it("starts in on-screen order and updates the preview immediately on move", () => {
    const state = new RankingState(makeTask());
    expect(state.order()).toEqual([1, 2, 3, 4, 5, 6, 7]);
    state.move(2, 0); // drag card 3 above card 1
    expect(state.order()).toEqual([3, 1, 2, 4, 5, 6, 7]);
    state.move(0, 6);
    expect(state.order()).toEqual([1, 2, 4, 5, 6, 7, 3]);
  });

  it("keeps the order a permutation under arbitrary moves", () => {
    const state = new RankingState(makeTask());
    let seed = 12345;
    const next = () => (seed = (seed * 1103515245 + 12345) % 2 ** 31) / 2 ** 31;
    for (let i = 0; i < 200; i++) {
      state.move(Math.floor(next() * 7), Math.floor(next() * 7));
      expect(isPermutation(state.order(), 7)).toBe(true);
    }
  });

  it("follows the moved card's curve, not its slot", () => {
    const state = new RankingState(makeTask());
    const topCurve = state.curveForCard(0);
    state.move(0, 3);
    expect(state.curveForCard(3)).toEqual(topCurve);
  });

  it("blocks submit until the plausibility question is answered", () => {
    const state = new RankingState(makeTask());
    expect(state.canSubmit()).toBe(false);
    state.plausibilityAnswer = "likely";
    expect(state.canSubmit()).toBe(true);
    state.markSubmitted();
    expect(state.canSubmit()).toBe(false);
  });

  it("rejects out-of-range moves", () => {
    const state = new RankingState(makeTask());
    expect(() => state.move(-1, 0)).toThrow(RangeError);
    expect(() => state.move(0, 7)).toThrow(RangeError);
  });
});
