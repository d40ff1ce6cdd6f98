// Chat view state and its pure transitions.
//
// Invariants enforced here: the message list is append-only, the composer
// is disabled while a reply is pending or once the session is done, and
// the rating form can be submitted at most once.

export interface ChatMessage {
  speaker: "human" | "agent";
  text: string;
  at: number;
}

export interface RatingState {
  visible: boolean;
  submitted: boolean;
  transcriptPath: string | null;
  validationError: string | null;
}

export interface ChatViewState {
  sessionId: string | null;
  instructions: string;
  messages: ChatMessage[];
  composerEnabled: boolean;
  awaitingReply: boolean;
  done: boolean;
  banner: string | null;
  rating: RatingState;
}

export function initialState(): ChatViewState {
  return {
    sessionId: null,
    instructions: "",
    messages: [],
    composerEnabled: false,
    awaitingReply: false,
    done: false,
    banner: null,
    rating: { visible: false, submitted: false, transcriptPath: null, validationError: null },
  };
}

function append(state: ChatViewState, message: ChatMessage): ChatMessage[] {
  return [...state.messages, message];
}

export function chatStarted(
  state: ChatViewState,
  started: { id: string; instructions: string; opening_prompt: string },
  now: number,
): ChatViewState {
  return {
    ...initialState(),
    sessionId: started.id,
    instructions: started.instructions,
    messages: [{ speaker: "agent", text: started.opening_prompt, at: now }],
    composerEnabled: true,
  };
}

export function startFailed(state: ChatViewState, message: string): ChatViewState {
  // No session id may survive a failed start.
  return { ...initialState(), banner: message };
}

/** Optimistic append of the human turn; blocked while a reply is pending. */
export function sendStarted(state: ChatViewState, text: string, now: number): ChatViewState {
  if (!state.composerEnabled || state.awaitingReply || state.done) {
    return state;
  }
  return {
    ...state,
    messages: append(state, { speaker: "human", text, at: now }),
    composerEnabled: false,
    awaitingReply: true,
    banner: null,
  };
}

export function replyArrived(state: ChatViewState, reply: string, done: boolean, now: number): ChatViewState {
  return {
    ...state,
    messages: append(state, { speaker: "agent", text: reply, at: now }),
    awaitingReply: false,
    done,
    composerEnabled: !done,
    rating: done ? { ...state.rating, visible: true } : state.rating,
  };
}

export function sendFailed(state: ChatViewState, message: string, sessionClosed: boolean): ChatViewState {
  return {
    ...state,
    awaitingReply: false,
    done: state.done || sessionClosed,
    composerEnabled: !sessionClosed,
    banner: sessionClosed ? null : message,
    rating: sessionClosed ? { ...state.rating, visible: true } : state.rating,
  };
}

export function validateRating(success: boolean | null, stars: number | null): string | null {
  if (success === null) {
    return "please choose whether the task succeeded";
  }
  if (stars === null || stars < 1 || stars > 5) {
    return "please pick a star rating between 1 and 5";
  }
  return null;
}

export function ratingRejected(state: ChatViewState, message: string): ChatViewState {
  return { ...state, rating: { ...state.rating, validationError: message } };
}

export function ratingSubmitted(state: ChatViewState, transcriptPath: string): ChatViewState {
  if (state.rating.submitted) {
    return state;
  }
  return {
    ...state,
    composerEnabled: false,
    rating: { visible: true, submitted: true, transcriptPath, validationError: null },
  };
}

/** Reconcile with the server transcript: the server is authoritative and
 * the local list must be a prefix-consistent view of it. */
export function reconcileWithServer(
  state: ChatViewState,
  server: { messages: { speaker: "user" | "system"; text: string | null }[]; done: boolean; status: string },
  now: number,
): ChatViewState {
  const mapped: ChatMessage[] = server.messages.map((m) => ({
    speaker: m.speaker === "user" ? "human" : "agent",
    text: m.text ?? "",
    at: now,
  }));
  const opening = state.messages.length > 0 && state.messages[0].speaker === "agent" ? [state.messages[0]] : [];
  const done = state.done || server.done || server.status === "closed";
  return {
    ...state,
    messages: [...opening, ...mapped],
    done,
    composerEnabled: state.composerEnabled && !done,
    rating: done ? { ...state.rating, visible: true } : state.rating,
  };
}

/** True when `prefix` is a prefix of `full` (by speaker and text). */
export function isTranscriptPrefix(prefix: ChatMessage[], full: ChatMessage[]): boolean {
  if (prefix.length > full.length) {
    return false;
  }
  return prefix.every((m, i) => m.speaker === full[i].speaker && m.text === full[i].text);
}
