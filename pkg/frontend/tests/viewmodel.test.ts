import { describe, expect, it } from "vitest";

import {
  deriveCard,
  deriveUi,
  genderClass,
  progressView,
  shortcutVerdict,
  VERDICT_KEYS,
} from "../src/viewmodel.js";
import { Progress, QueueItem, QueuePage } from "../src/types.js";

function item(overrides: Partial<QueueItem> = {}): QueueItem {
  return {
    pair_id: "00aa11bb22cc33dd",
    language: "fr",
    label: "AT_RISK",
    reason: "GENDERS_DIFFER",
    original: {
      tokens: ["the", "doctor", "works", "."],
      text: "the doctor works.",
      focus_index: 1,
      focus: "doctor",
      translation: {
        tokens: ["le", "médecin", "travaille", "."],
        text: "le médecin travaille.",
        target_index: 1,
        gender: "MASCULINE",
      },
    },
    substituted: {
      tokens: ["the", "nurse", "works", "."],
      text: "the nurse works.",
      focus_index: 1,
      focus: "nurse",
      translation: {
        tokens: ["la", "infirmière", "travaille", "."],
        text: "la infirmière travaille.",
        target_index: 1,
        gender: "FEMININE",
      },
    },
    state: "PENDING",
    ...overrides,
  };
}

function page(items: QueueItem[]): QueuePage {
  return { items, total: items.length, page: 1, page_size: 20 };
}

function progress(overrides: Partial<Progress> = {}): Progress {
  return {
    language: "fr",
    total: 204,
    accepted: 0,
    rejected_fixed: 0,
    rejected_other: 0,
    pending: 204,
    reviewed: 0,
    selection_rate: null,
    quota: 100,
    quota_met: false,
    ...overrides,
  };
}

describe("genderClass", () => {
  it("pairs every gender with a distinct class", () => {
    const classes = [
      genderClass("MASCULINE"),
      genderClass("FEMININE"),
      genderClass("NEUTER"),
      genderClass("UNKNOWN"),
    ];
    expect(new Set(classes).size).toBe(4);
    expect(genderClass("MASCULINE")).toBe("gender-masculine");
    expect(genderClass(null)).toBe("gender-unknown");
  });
});

describe("shortcutVerdict", () => {
  it("maps the three keys 1:1 onto the three verdicts", () => {
    const verdicts = Object.values(VERDICT_KEYS);
    expect(new Set(verdicts).size).toBe(3);
    expect(shortcutVerdict("1")).toBe("ACCEPTED");
    expect(shortcutVerdict("2")).toBe("REJECTED_FIXED_GENDER");
    expect(shortcutVerdict("3")).toBe("REJECTED_OTHER");
  });

  it("treats every other key as not-a-shortcut", () => {
    for (const key of ["0", "4", "a", "Enter", " ", "Escape"]) {
      expect(shortcutVerdict(key)).toBeNull();
    }
  });
});

describe("deriveCard", () => {
  it("emphasizes the focus token on each side and styles the translation focus", () => {
    const card = deriveCard(item());
    const [original, substituted] = card.sides;

    expect(original.source.map((s) => s.emphasized)).toEqual([false, true, false, false]);
    expect(original.source[1].cssClass).toBe("focus-source");
    expect(original.source[0].cssClass).toBe("");

    expect(original.translation![1].emphasized).toBe(true);
    expect(original.translation![1].cssClass).toBe("gender-masculine");
    expect(substituted.translation![1].cssClass).toBe("gender-feminine");
    expect(substituted.translation![0].cssClass).toBe("");
  });

  it("keeps a missing translation as null", () => {
    const bare = item();
    bare.substituted.translation = null;
    const card = deriveCard(bare);
    expect(card.sides[1].translation).toBeNull();
    expect(card.sides[1].gender).toBeNull();
  });
});

describe("progressView", () => {
  it("formats the quota bar", () => {
    const view = progressView(progress({ accepted: 37, pending: 150, rejected_other: 17 }));
    expect(view.percent).toBeCloseTo(37);
    expect(view.text).toBe("37 / 100 accepted");
    expect(view.counts).toBe("150 pending, 17 rejected of 204");
    expect(view.quotaMet).toBe(false);
  });

  it("caps the bar at 100%", () => {
    const view = progressView(progress({ accepted: 130, quota_met: true }));
    expect(view.percent).toBe(100);
    expect(view.quotaMet).toBe(true);
  });
});

describe("deriveUi", () => {
  it("is loading until both responses arrive", () => {
    const ui = deriveUi({ queue: null, progress: null, inFlight: false, error: null });
    expect(ui.mode).toBe("loading");
    expect(ui.buttonsEnabled).toBe(false);
  });

  it("shows the nothing-to-review state on an empty queue", () => {
    const ui = deriveUi({
      queue: page([]),
      progress: progress({ pending: 0, reviewed: 204, accepted: 120, quota_met: true }),
      inFlight: false,
      error: null,
    });
    expect(ui.mode).toBe("empty");
    expect(ui.card).toBeNull();
    expect(ui.buttonsEnabled).toBe(false);
    expect(ui.banner).toBe(true);
  });

  it("enables the verdict buttons only while no submission is in flight", () => {
    const state = { queue: page([item()]), progress: progress(), error: null };
    expect(deriveUi({ ...state, inFlight: false }).buttonsEnabled).toBe(true);
    expect(deriveUi({ ...state, inFlight: true }).buttonsEnabled).toBe(false);
  });

  it("derives the card and toast from the responses alone", () => {
    const ui = deriveUi({
      queue: page([item()]),
      progress: progress(),
      inFlight: false,
      error: "boom",
    });
    expect(ui.mode).toBe("reviewing");
    expect(ui.card!.pairId).toBe("00aa11bb22cc33dd");
    expect(ui.toast).toBe("boom");
    expect(ui.banner).toBe(false);
  });
});
