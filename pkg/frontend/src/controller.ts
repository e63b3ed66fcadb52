// Session controller.  Holds the last API responses for one language and
// one annotator tab, and drives the submit/advance loop against them.

import { ApiError, ReviewApi } from "./api.js";
import { shortcutVerdict } from "./viewmodel.js";
import { Progress, QueueItem, QueuePage, Verdict } from "./types.js";

export interface SessionState {
  language: string;
  queue: QueuePage | null;
  progress: Progress | null;
  inFlight: boolean;
  error: string | null;
  lastFailedVerdict: Verdict | null;
}

export class ReviewSession {
  state: SessionState;

  constructor(
    private readonly api: ReviewApi,
    language: string,
    private readonly annotatorId?: string,
    private readonly onChange: (state: SessionState) => void = () => {},
  ) {
    this.state = {
      language,
      queue: null,
      progress: null,
      inFlight: false,
      error: null,
      lastFailedVerdict: null,
    };
  }

  // The queue arrives in stable pair_id order; the head is the card on screen.
  currentItem(): QueueItem | null {
    const items = this.state.queue ? this.state.queue.items : [];
    return items.length > 0 ? items[0] : null;
  }

  async refresh(): Promise<void> {
    try {
      const [queue, progress] = await Promise.all([
        this.api.fetchQueue(this.state.language),
        this.api.fetchProgress(this.state.language),
      ]);
      this.state = { ...this.state, queue, progress, error: null };
    } catch (err) {
      this.state = { ...this.state, error: describe(err) };
    }
    this.emit();
  }

  // Submits a verdict for the card at the head of the queue.  Returns false
  // without issuing any request when no card is loaded or one is in flight.
  async submit(verdict: Verdict): Promise<boolean> {
    const item = this.currentItem();
    if (!item || this.state.inFlight) {
      return false;
    }
    const before = this.state;
    this.state = {
      ...before,
      inFlight: true,
      error: null,
      progress: optimistic(before.progress, verdict),
    };
    this.emit();
    try {
      const progress = await this.api.submitDecision(
        item.pair_id,
        this.state.language,
        verdict,
        this.annotatorId,
      );
      // The decision response carries server-side progress; together with
      // the refetched queue it replaces the optimistic counts.
      const queue = await this.api.fetchQueue(this.state.language);
      this.state = {
        ...this.state,
        queue,
        progress,
        inFlight: false,
        error: null,
        lastFailedVerdict: null,
      };
      this.emit();
      return true;
    } catch (err) {
      // Failure keeps the card: queue and counts roll back to the
      // pre-submit responses, and the error feeds the toast.
      this.state = {
        ...before,
        inFlight: false,
        error: describe(err),
        lastFailedVerdict: verdict,
      };
      this.emit();
      return false;
    }
  }

  // Retry affordance after a failed submission.
  retry(): Promise<boolean> {
    const verdict = this.state.lastFailedVerdict;
    if (!verdict) {
      return Promise.resolve(false);
    }
    return this.submit(verdict);
  }

  dismissError(): void {
    this.state = { ...this.state, error: null };
    this.emit();
  }

  // Keyboard path; inherits the no-card guard from submit().
  handleKey(key: string): Promise<boolean> {
    const verdict = shortcutVerdict(key);
    if (!verdict) {
      return Promise.resolve(false);
    }
    return this.submit(verdict);
  }

  private emit(): void {
    this.onChange(this.state);
  }
}

function optimistic(progress: Progress | null, verdict: Verdict): Progress | null {
  if (!progress) {
    return progress;
  }
  const next = {
    ...progress,
    pending: Math.max(0, progress.pending - 1),
    reviewed: progress.reviewed + 1,
  };
  if (verdict === "ACCEPTED") {
    next.accepted += 1;
  } else if (verdict === "REJECTED_FIXED_GENDER") {
    next.rejected_fixed += 1;
  } else {
    next.rejected_other += 1;
  }
  next.quota_met = next.accepted >= next.quota;
  return next;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.message;
  }
  return String(err);
}
