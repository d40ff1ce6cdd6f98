import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, closeSession, createSession, listConfigs, postMessage } from "../src/api.js";

function mockFetch(status: number, body: unknown) {
  const fn = vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    text: async () => JSON.stringify(body),
  }));
  vi.stubGlobal("fetch", fn);
  return fn;
}

afterEach(() => vi.unstubAllGlobals());

describe("api client", () => {
  it("creates sessions against the sessions endpoint", async () => {
    const fn = mockFetch(200, { id: "abc", status: "open", instructions: "x", opening_prompt: "hi" });
    const session = await createSession("http://h", "toy_pipeline", 7);
    expect(session.id).toBe("abc");
    expect(fn).toHaveBeenCalledWith(
      "http://h/sessions",
      expect.objectContaining({ method: "POST", body: JSON.stringify({ config: "toy_pipeline", seed: 7 }) }),
    );
  });

  it("posts messages to the per-session endpoint", async () => {
    const fn = mockFetch(200, { reply: "ok", done: false, turns: 2 });
    const reply = await postMessage("", "abc", "hello");
    expect(reply.done).toBe(false);
    expect(fn).toHaveBeenCalledWith("/sessions/abc/messages", expect.anything());
  });

  it("maps error bodies to ApiError with the http status", async () => {
    mockFetch(404, { detail: "no session 'abc'" });
    await expect(postMessage("", "abc", "x")).rejects.toThrowError(ApiError);
    await expect(postMessage("", "abc", "x")).rejects.toMatchObject({ status: 404 });
  });

  it("maps network failure to status 0", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => {
        throw new TypeError("fetch failed");
      }),
    );
    await expect(listConfigs("http://down")).rejects.toMatchObject({ status: 0 });
  });

  it("close sends the rating payload", async () => {
    const fn = mockFetch(200, { transcript_path: "/p.json", auto_success: true, human_success: true });
    const result = await closeSession("", "abc", { success: true, stars: 5, comment: "nice" });
    expect(result.transcript_path).toBe("/p.json");
    const body = JSON.parse((fn.mock.calls[0] as unknown[])[1]!["body"] as string);
    expect(body).toEqual({ success: true, stars: 5, comment: "nice" });
  });
});
