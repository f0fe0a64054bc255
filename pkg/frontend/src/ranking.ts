/** State for one ranking trial: order 7 candidate-curve cards best-to-worst. */

import type { OccamTask } from "./api.js";

/** Client-side mirror of the server rule: order must be a permutation of 1..n. */
export function isPermutation(order: number[], n: number): boolean {
  if (order.length !== n) return false;
  const seen = new Set(order);
  if (seen.size !== n) return false;
  for (const v of order) {
    if (!Number.isInteger(v) || v < 1 || v > n) return false;
  }
  return true;
}

export class RankingState {
  /** Display positions in current best-to-worst order. */
  private cards: number[];
  plausibilityAnswer: string | null = null;
  private submitted = false;

  constructor(readonly task: OccamTask) {
    // Cards start in on-screen (server-shuffled) order.
    this.cards = task.curves.map((c) => c.position);
  }

  /** Current best-to-worst order of display positions. */
  order(): number[] {
    return [...this.cards];
  }

  /** Move the card at index `from` so it sits at index `to`; preview updates immediately. */
  move(from: number, to: number): void {
    const n = this.cards.length;
    if (from < 0 || from >= n || to < 0 || to >= n) {
      throw new RangeError(`move(${from}, ${to}) out of range for ${n} cards`);
    }
    const [card] = this.cards.splice(from, 1);
    this.cards.splice(to, 0, card);
  }

  curveForCard(index: number): number[] {
    const position = this.cards[index];
    const match = this.task.curves.find((c) => c.position === position);
    if (!match) throw new Error(`no curve at display position ${position}`);
    return match.curve;
  }

  canSubmit(): boolean {
    return (
      !this.submitted &&
      isPermutation(this.cards, this.task.curves.length) &&
      this.plausibilityAnswer !== null
    );
  }

  markSubmitted(): void {
    this.submitted = true;
  }
}
