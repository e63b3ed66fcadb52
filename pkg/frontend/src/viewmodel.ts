// Pure view derivations.  Everything here is a function of the last API
// responses, so the rendered UI can never drift from what the server said.

import {
  Gender,
  Progress,
  QueueItem,
  QueuePage,
  SideView,
  TranslationView,
  Verdict,
} from "./types.js";

export interface Segment {
  text: string;
  emphasized: boolean;
  cssClass: string;
}

export interface CardSide {
  title: "original" | "substituted";
  source: Segment[];
  translation: Segment[] | null;
  gender: Gender | null;
}

export interface ReviewCard {
  pairId: string;
  language: string;
  label: string;
  reason: string | null;
  sides: [CardSide, CardSide];
}

// Each gender pairs a color with a distinct non-color cue (italic,
// underline, ...) so color is never the only signal.
export function genderClass(gender: Gender | null): string {
  switch (gender) {
    case "MASCULINE":
      return "gender-masculine";
    case "FEMININE":
      return "gender-feminine";
    case "NEUTER":
      return "gender-neuter";
    default:
      return "gender-unknown";
  }
}

function sourceSegments(tokens: string[], focusIndex: number): Segment[] {
  return tokens.map((text, i) => ({
    text,
    emphasized: i === focusIndex,
    cssClass: i === focusIndex ? "focus-source" : "",
  }));
}

function translationSegments(view: TranslationView | null): Segment[] | null {
  if (!view) {
    return null;
  }
  return view.tokens.map((text, i) => ({
    text,
    emphasized: i === view.target_index,
    cssClass: i === view.target_index ? genderClass(view.gender) : "",
  }));
}

export function deriveCard(item: QueueItem): ReviewCard {
  const side = (title: CardSide["title"], view: SideView): CardSide => ({
    title,
    source: sourceSegments(view.tokens, view.focus_index),
    translation: translationSegments(view.translation),
    gender: view.translation ? view.translation.gender : null,
  });
  return {
    pairId: item.pair_id,
    language: item.language,
    label: item.label,
    reason: item.reason,
    sides: [side("original", item.original), side("substituted", item.substituted)],
  };
}

export interface ProgressView {
  percent: number;
  text: string;
  counts: string;
  quotaMet: boolean;
}

export function progressView(progress: Progress): ProgressView {
  const percent =
    progress.quota <= 0
      ? 100
      : Math.min(100, (100 * progress.accepted) / progress.quota);
  const rejected = progress.rejected_fixed + progress.rejected_other;
  return {
    percent,
    text: `${progress.accepted} / ${progress.quota} accepted`,
    counts: `${progress.pending} pending, ${rejected} rejected of ${progress.total}`,
    quotaMet: progress.quota_met,
  };
}

export const VERDICT_KEYS: Record<string, Verdict> = {
  "1": "ACCEPTED",
  "2": "REJECTED_FIXED_GENDER",
  "3": "REJECTED_OTHER",
};

// 1:1 keyboard mapping; any other key is not a shortcut.
export function shortcutVerdict(key: string): Verdict | null {
  return VERDICT_KEYS[key] ?? null;
}

export type UiMode = "loading" | "empty" | "reviewing";

export interface UiView {
  mode: UiMode;
  card: ReviewCard | null;
  progress: ProgressView | null;
  buttonsEnabled: boolean;
  banner: boolean;
  toast: string | null;
}

export interface SessionSnapshot {
  queue: QueuePage | null;
  progress: Progress | null;
  inFlight: boolean;
  error: string | null;
}

export function deriveUi(state: SessionSnapshot): UiView {
  const progress = state.progress ? progressView(state.progress) : null;
  const banner = progress ? progress.quotaMet : false;
  if (!state.queue || !state.progress) {
    return {
      mode: "loading",
      card: null,
      progress,
      buttonsEnabled: false,
      banner,
      toast: state.error,
    };
  }
  const item = state.queue.items.length > 0 ? state.queue.items[0] : null;
  if (!item) {
    return {
      mode: "empty",
      card: null,
      progress,
      buttonsEnabled: false,
      banner,
      toast: state.error,
    };
  }
  return {
    mode: "reviewing",
    card: deriveCard(item),
    progress,
    buttonsEnabled: !state.inFlight,
    banner,
    toast: state.error,
  };
}
