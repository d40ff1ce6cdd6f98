import { describe, expect, it } from "vitest";

import {
  chatStarted,
  initialState,
  isTranscriptPrefix,
  ratingRejected,
  ratingSubmitted,
  reconcileWithServer,
  replyArrived,
  sendFailed,
  sendStarted,
  startFailed,
  validateRating,
} from "../src/state.js";

const started = () =>
  chatStarted(initialState(), { id: "s1", instructions: "find a restaurant", opening_prompt: "hello" }, 1);

describe("start", () => {
  it("renders instructions and enables the composer", () => {
    const state = started();
    expect(state.sessionId).toBe("s1");
    expect(state.instructions).toBe("find a restaurant");
    expect(state.composerEnabled).toBe(true);
    expect(state.messages).toEqual([{ speaker: "agent", text: "hello", at: 1 }]);
  });

  it("failed start stores no session id", () => {
    const state = startFailed(initialState(), "service down");
    expect(state.sessionId).toBeNull();
    expect(state.banner).toBe("service down");
  });
});

describe("composer contract", () => {
  it("optimistically appends the human turn and disables the composer", () => {
    const state = sendStarted(started(), "hi", 2);
    expect(state.messages.at(-1)).toEqual({ speaker: "human", text: "hi", at: 2 });
    expect(state.composerEnabled).toBe(false);
    expect(state.awaitingReply).toBe(true);
  });

  it("blocks a second send while awaiting the reply", () => {
    const first = sendStarted(started(), "hi", 2);
    const second = sendStarted(first, "hi again", 3);
    expect(second).toBe(first); // unchanged: the send was rejected
  });

  it("re-enables the composer after a reply when not done", () => {
    const state = replyArrived(sendStarted(started(), "hi", 2), "how can i help", false, 3);
    expect(state.composerEnabled).toBe(true);
    expect(state.awaitingReply).toBe(false);
    expect(state.rating.visible).toBe(false);
  });

  it("keeps the composer disabled and shows the rating form when done", () => {
    const state = replyArrived(sendStarted(started(), "bye", 2), "goodbye", true, 3);
    expect(state.composerEnabled).toBe(false);
    expect(state.done).toBe(true);
    expect(state.rating.visible).toBe(true);
  });

  it("message list is append-only across transitions", () => {
    let state = started();
    const seen: string[] = state.messages.map((m) => m.text);
    for (const [text, reply] of [
      ["a", "ra"],
      ["b", "rb"],
    ] as const) {
      state = sendStarted(state, text, 1);
      expect(state.messages.map((m) => m.text).slice(0, seen.length)).toEqual(seen);
      seen.push(text);
      state = replyArrived(state, reply, false, 2);
      expect(state.messages.map((m) => m.text).slice(0, seen.length)).toEqual(seen);
      seen.push(reply);
    }
  });

  it("a closed-session error reveals the rating form", () => {
    const state = sendFailed(sendStarted(started(), "hi", 1), "session closed", true);
    expect(state.rating.visible).toBe(true);
    expect(state.composerEnabled).toBe(false);
  });
});

describe("rating", () => {
  it("requires a success choice", () => {
    expect(validateRating(null, 4)).toMatch(/succeeded/);
  });

  it("requires stars in 1..5", () => {
    expect(validateRating(true, null)).toMatch(/star/);
    expect(validateRating(true, 7)).toMatch(/star/);
    expect(validateRating(true, 3)).toBeNull();
  });

  it("submit is final and records the transcript path", () => {
    let state = ratingSubmitted(started(), "/runs/human/x.json");
    expect(state.rating.submitted).toBe(true);
    expect(state.rating.transcriptPath).toBe("/runs/human/x.json");
    const again = ratingSubmitted(state, "/other.json");
    expect(again).toBe(state); // second submit blocked
  });

  it("validation errors render and clear on success", () => {
    let state = ratingRejected(started(), "please choose");
    expect(state.rating.validationError).toBe("please choose");
    state = ratingSubmitted(state, "/p.json");
    expect(state.rating.validationError).toBeNull();
  });
});

describe("server reconciliation", () => {
  it("rebuilds the transcript from the server view after the opening prompt", () => {
    let state = started();
    state = sendStarted(state, "hi", 2);
    state = replyArrived(state, "reply", false, 3);
    const server = {
      messages: [
        { speaker: "user" as const, text: "hi" },
        { speaker: "system" as const, text: "reply" },
      ],
      done: false,
      status: "open",
    };
    const next = reconcileWithServer(state, server, 4);
    expect(next.messages.map((m) => m.text)).toEqual(["hello", "hi", "reply"]);
  });

  it("a closed server session forces the done view", () => {
    const next = reconcileWithServer(started(), { messages: [], done: false, status: "closed" }, 2);
    expect(next.done).toBe(true);
    expect(next.composerEnabled).toBe(false);
  });

  it("prefix check accepts prefixes and rejects divergence", () => {
    const a = [{ speaker: "human" as const, text: "x", at: 1 }];
    const b = [
      { speaker: "human" as const, text: "x", at: 9 },
      { speaker: "agent" as const, text: "y", at: 9 },
    ];
    expect(isTranscriptPrefix(a, b)).toBe(true);
    expect(isTranscriptPrefix(b, a)).toBe(false);
    expect(isTranscriptPrefix([{ speaker: "agent", text: "z", at: 1 }], b)).toBe(false);
  });
});
