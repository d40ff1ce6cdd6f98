// DOM wiring: renders ChatViewState and drives the service API.

import {
  ApiError,
  closeSession,
  createSession,
  getSession,
  listConfigs,
  postMessage,
} from "./api.js";
import {
  ChatViewState,
  chatStarted,
  initialState,
  ratingRejected,
  ratingSubmitted,
  replyArrived,
  reconcileWithServer,
  sendFailed,
  sendStarted,
  startFailed,
  validateRating,
} from "./state.js";

export class ChatApp {
  state: ChatViewState = initialState();
  private root: Document;
  private base: string;

  constructor(root: Document, base = "") {
    this.root = root;
    this.base = base;
  }

  el<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  async init(): Promise<void> {
    const select = this.el<HTMLSelectElement>("config-select");
    try {
      const { configs } = await listConfigs(this.base);
      select.innerHTML = "";
      for (const name of configs) {
        const option = this.root.createElement("option");
        option.value = name;
        option.textContent = name;
        select.appendChild(option);
      }
    } catch (err) {
      this.state = startFailed(this.state, `could not list configs: ${(err as Error).message}`);
    }
    this.el<HTMLButtonElement>("start-btn").addEventListener("click", () => void this.start());
    this.el<HTMLFormElement>("composer").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.send();
    });
    this.el<HTMLFormElement>("rating-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitRating();
    });
    this.render();
  }

  async start(): Promise<void> {
    const config = this.el<HTMLSelectElement>("config-select").value;
    try {
      const started = await createSession(this.base, config);
      this.state = chatStarted(this.state, started, Date.now());
    } catch (err) {
      this.state = startFailed(this.state, (err as Error).message);
    }
    this.render();
  }

  async send(): Promise<void> {
    const input = this.el<HTMLInputElement>("send-input");
    const text = input.value.trim();
    const sessionId = this.state.sessionId;
    if (!text || !sessionId) return;
    const before = this.state;
    this.state = sendStarted(this.state, text, Date.now());
    if (this.state === before) return; // composer contract blocked the send
    input.value = "";
    this.render();
    try {
      const reply = await postMessage(this.base, sessionId, text);
      this.state = replyArrived(this.state, reply.reply, reply.done, Date.now());
    } catch (err) {
      const closed = err instanceof ApiError && err.status === 409;
      this.state = sendFailed(this.state, (err as Error).message, closed);
    }
    await this.poll();
    this.render();
  }

  /** Poll the session resource after each post (the server transcript is
   * authoritative); keeps the rendered view prefix-consistent. */
  async poll(): Promise<void> {
    if (!this.state.sessionId) return;
    try {
      const view = await getSession(this.base, this.state.sessionId);
      this.state = reconcileWithServer(this.state, view, Date.now());
    } catch {
      /* a failed poll leaves the optimistic view in place */
    }
  }

  async submitRating(): Promise<void> {
    if (this.state.rating.submitted || !this.state.sessionId) return;
    const stars = Number(this.el<HTMLSelectElement>("rating-stars").value) || null;
    const successRaw = (this.root.querySelector('input[name="rating-success"]:checked') as HTMLInputElement | null)?.value;
    const success = successRaw === undefined ? null : successRaw === "yes";
    const comment = this.el<HTMLTextAreaElement>("rating-comment").value;
    const problem = validateRating(success, stars);
    if (problem) {
      this.state = ratingRejected(this.state, problem);
      this.render();
      return;
    }
    try {
      const result = await closeSession(this.base, this.state.sessionId, {
        success: success as boolean,
        stars: stars as number,
        comment,
      });
      this.state = ratingSubmitted(this.state, result.transcript_path);
    } catch (err) {
      this.state = ratingRejected(this.state, (err as Error).message);
    }
    this.render();
  }

  render(): void {
    const state = this.state;
    const banner = this.el<HTMLDivElement>("banner");
    banner.textContent = state.banner ?? "";
    banner.hidden = state.banner === null;

    this.el<HTMLDivElement>("instructions").textContent = state.instructions;
    this.el<HTMLDivElement>("setup").hidden = state.sessionId !== null;
    this.el<HTMLDivElement>("chat").hidden = state.sessionId === null;

    const list = this.el<HTMLUListElement>("messages");
    list.innerHTML = "";
    for (const message of state.messages) {
      const item = this.root.createElement("li");
      item.className = `msg ${message.speaker}`;
      item.textContent = message.text;
      list.appendChild(item);
    }

    this.el<HTMLInputElement>("send-input").disabled = !state.composerEnabled;
    this.el<HTMLButtonElement>("send-btn").disabled = !state.composerEnabled;

    const ratingForm = this.el<HTMLFormElement>("rating-form");
    ratingForm.hidden = !state.rating.visible || state.rating.submitted;
    const ratingError = this.el<HTMLDivElement>("rating-error");
    ratingError.textContent = state.rating.validationError ?? "";
    ratingError.hidden = state.rating.validationError === null;

    const confirmation = this.el<HTMLDivElement>("confirmation");
    confirmation.hidden = !state.rating.submitted;
    confirmation.textContent = state.rating.submitted
      ? `thanks! transcript saved to ${state.rating.transcriptPath}`
      : "";
  }
}
