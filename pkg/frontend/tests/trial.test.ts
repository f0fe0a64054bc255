import { describe, expect, it } from "vitest";

import type { Stimulus } from "../src/api";
import { TrialState, validateYStar } from "../src/trial";

const STIMULUS: Stimulus = {
  id: "stim-1",
  X_train: [0, 1, 2],
  y_train: [0.5, -0.25, 1.0],
  X_test: [3, 4, 5, 6],
  family: "test",
  y_range: [-2, 2],
};

function fakeClock(times: number[]): () => number {
  let i = 0;
  return () => times[Math.min(i++, times.length - 1)];
}

describe("TrialState", () => {
  it("enables submit only once every test x has a placed value", () => {
    const trial = new TrialState(STIMULUS, fakeClock([0]));
    trial.markRendered();
    expect(trial.canSubmit()).toBe(false);
    trial.placeMarker(0, 0.1);
    trial.placeMarker(1, -0.2);
    trial.placeMarker(2, 0.3);
    expect(trial.canSubmit()).toBe(false);
    trial.placeMarker(3, 0.4);
    expect(trial.canSubmit()).toBe(true);
    expect(trial.yStar()).toEqual([0.1, -0.2, 0.3, 0.4]);
  });

  it("blocks submit before first render and after submission", () => {
    const trial = new TrialState(STIMULUS, fakeClock([0]));
    for (let i = 0; i < 4; i++) trial.placeMarker(i, 0);
    expect(trial.canSubmit()).toBe(false); // timer not started yet
    trial.markRendered();
    expect(trial.canSubmit()).toBe(true);
    trial.markSubmitted();
    expect(trial.canSubmit()).toBe(false);
  });

  it("measures elapsed time from first render on the injected clock", () => {
    // Clock consulted twice: once at first render, once at read; the second
    // markRendered() must not consume a tick or restart the timer.
    const trial = new TrialState(STIMULUS, fakeClock([1000, 4500]));
    trial.markRendered();
    trial.markRendered(); // second render must not restart the timer
    expect(trial.elapsedSeconds()).toBeCloseTo(3.5, 12);
  });

  it("rejects out-of-range indices and non-finite values", () => {
    const trial = new TrialState(STIMULUS);
    expect(() => trial.placeMarker(4, 0)).toThrow(RangeError);
    expect(() => trial.placeMarker(-1, 0)).toThrow(RangeError);
    expect(() => trial.placeMarker(0, Number.NaN)).toThrow(RangeError);
    expect(() => trial.placeMarker(0, Infinity)).toThrow(RangeError);
  });

  it("round-trips drafts and ignores drafts for a different stimulus", () => {
    const trial = new TrialState(STIMULUS);
    trial.placeMarker(1, -0.75);
    const draft = trial.toDraft();

    const resumed = new TrialState(STIMULUS);
    resumed.restoreDraft(JSON.parse(JSON.stringify(draft)));
    expect(resumed.markerAt(1)).toBe(-0.75);
    expect(resumed.markerAt(0)).toBeNull();

    const other = new TrialState({ ...STIMULUS, id: "stim-2" });
    other.restoreDraft(draft);
    expect(other.placedCount).toBe(0);
  });
});

describe("validateYStar", () => {
  it("mirrors the server rules: exact length and all-finite", () => {
    expect(validateYStar([1, 2, 3, 4], 4)).toBeNull();
    expect(validateYStar([1, 2, 3], 4)).toMatch(/expected 4/);
    expect(validateYStar([1, 2, 3, Number.NaN], 4)).toMatch(/index 3/);
    expect(validateYStar([1, 2, Infinity, 4], 4)).toMatch(/index 2/);
  });
});
