// Wire types for the review-service JSON API.

export type Gender = "MASCULINE" | "FEMININE" | "NEUTER" | "UNKNOWN";

export type Verdict = "ACCEPTED" | "REJECTED_FIXED_GENDER" | "REJECTED_OTHER";

export interface TranslationView {
  tokens: string[];
  text: string;
  target_index: number;
  gender: Gender | null;
}

export interface SideView {
  tokens: string[];
  text: string;
  focus_index: number;
  focus: string;
  translation: TranslationView | null;
}

export interface QueueItem {
  pair_id: string;
  language: string;
  label: string;
  reason: string | null;
  original: SideView;
  substituted: SideView;
  state: string;
}

export interface QueuePage {
  items: QueueItem[];
  total: number;
  page: number;
  page_size: number;
}

export interface Progress {
  language: string;
  total: number;
  accepted: number;
  rejected_fixed: number;
  rejected_other: number;
  pending: number;
  reviewed: number;
  selection_rate: number | null;
  quota: number;
  quota_met: boolean;
}
