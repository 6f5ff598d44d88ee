/**
 * Labeling session state machine.
 *
 * The queue is always server-driven: a post leaves it only after the API
 * acknowledges the label with a 2xx, and a reload simply re-fetches the
 * queue, so no local-only state can survive. Client-side validation
 * mirrors the server's 422 rule (Yes needs at least one characteristic)
 * so bad submissions are blocked before they reach the network.
 */

import { ApiClient, ApiError, BatchPost, Disagreement } from "./api.js";

export type Decision = "Yes" | "No";

export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ValidationError";
  }
}

/** Returns an error message, or null when the label is submittable. */
export function validateLabel(decision: Decision,
                              characteristics: string[]): string | null {
  if (decision === "Yes" && characteristics.length === 0) {
    return "Select at least one protected characteristic for a Yes decision.";
  }
  if (decision === "No" && characteristics.length > 0) {
    return "Characteristics only apply to Yes decisions.";
  }
  return null;
}

export type AgreementView =
  | { state: "waiting" }
  | { state: "ready"; percentAgreement: number; disagreements: Disagreement[] };

export class LabelingSession {
  queue: BatchPost[] = [];
  total = 0;
  submitted = 0;

  constructor(private readonly api: ApiClient, readonly round: number) {}

  /** Re-fetch the queue from the server (initial load and reload both). */
  async refresh(): Promise<void> {
    const batch = await this.api.myBatch(this.round);
    this.queue = batch.posts;
    this.total = batch.total;
    this.submitted = batch.labeled;
  }

  current(): BatchPost | null {
    return this.queue.length > 0 ? this.queue[0] : null;
  }

  get progress(): { done: number; total: number } {
    return { done: this.submitted, total: this.total };
  }

  roundComplete(): boolean {
    return this.total > 0 && this.submitted >= this.total;
  }

  /**
   * Submit a label for the current post. The post leaves the queue only
   * after the server acknowledges; validation failures never reach the
   * network.
   */
  async submit(decision: Decision, characteristics: string[]): Promise<void> {
    const post = this.current();
    if (!post) {
      throw new ValidationError("Nothing left to label in this round.");
    }
    const problem = validateLabel(decision, characteristics);
    if (problem) {
      throw new ValidationError(problem);
    }
    await this.api.submitLabel(post.post_id, decision, characteristics);
    this.queue.shift();
    this.submitted += 1;
  }

  /**
   * The post-round agreement view; while the partner is still labeling the
   * server answers 409 and the view stays in the waiting state.
   */
  async agreementView(): Promise<AgreementView> {
    try {
      const data = await this.api.agreement(this.round);
      return {
        state: "ready",
        percentAgreement: data.percent_agreement,
        disagreements: data.disagreements,
      };
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        return { state: "waiting" };
      }
      throw error;
    }
  }
}
