/** State for one extrapolation trial: one adjustable y marker per test x. */

import type { Stimulus } from "./api.js";

/**
 * Client-side mirror of the server's response validation: y_star must have
 * exactly one finite value per test-grid x.
 */
export function validateYStar(yStar: number[], nTest: number): string | null {
  if (yStar.length !== nTest) {
    return `expected ${nTest} values, got ${yStar.length}`;
  }
  for (let i = 0; i < yStar.length; i++) {
    if (typeof yStar[i] !== "number" || !Number.isFinite(yStar[i])) {
      return `value at index ${i} is not finite`;
    }
  }
  return null;
}

export interface TrialDraft {
  stimulusId: string;
  placed: (number | null)[];
}

export type Clock = () => number;

export class TrialState {
  private readonly placed: (number | null)[];
  private startedAt: number | null = null;
  private submitted = false;

  constructor(
    readonly stimulus: Stimulus,
    private readonly clock: Clock = () => performance.now(),
  ) {
    this.placed = new Array<number | null>(stimulus.X_test.length).fill(null);
  }

  /** Call on first render of the plot; starts the response timer. */
  markRendered(): void {
    if (this.startedAt === null) this.startedAt = this.clock();
  }

  get started(): boolean {
    return this.startedAt !== null;
  }

  placeMarker(index: number, y: number): void {
    if (index < 0 || index >= this.placed.length) {
      throw new RangeError(`marker index ${index} out of range`);
    }
    if (!Number.isFinite(y)) {
      throw new RangeError(`marker value must be finite, got ${y}`);
    }
    this.placed[index] = y;
  }

  markerAt(index: number): number | null {
    return this.placed[index];
  }

  get placedCount(): number {
    return this.placed.filter((v) => v !== null).length;
  }

  /** Submission is enabled only when every test x has a placed value. */
  canSubmit(): boolean {
    return (
      !this.submitted &&
      this.startedAt !== null &&
      this.placed.every((v) => v !== null)
    );
  }

  yStar(): number[] {
    if (!this.placed.every((v) => v !== null)) {
      throw new Error("cannot read y_star before all markers are placed");
    }
    return this.placed.map((v) => v as number);
  }

  /** Submit instant minus first-render instant, in seconds (monotonic clock). */
  elapsedSeconds(): number {
    if (this.startedAt === null) {
      throw new Error("timer not started; call markRendered() first");
    }
    return (this.clock() - this.startedAt) / 1000;
  }

  markSubmitted(): void {
    this.submitted = true;
  }

  /** Draft for local persistence so a failed submit loses no data. */
  toDraft(): TrialDraft {
    return { stimulusId: this.stimulus.id, placed: [...this.placed] };
  }

  restoreDraft(draft: TrialDraft): void {
    if (draft.stimulusId !== this.stimulus.id) return;
    if (draft.placed.length !== this.placed.length) return;
    for (let i = 0; i < draft.placed.length; i++) {
      const v = draft.placed[i];
      if (v !== null && Number.isFinite(v)) this.placed[i] = v;
    }
  }
}
