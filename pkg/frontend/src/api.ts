// Typed client for the dialoglab chat service endpoints.

export interface SessionStart {
  id: string;
  status: string;
  instructions: string;
  opening_prompt: string;
}

export interface MessageReply {
  reply: string;
  done: boolean;
  turns: number;
}

export interface CloseResult {
  transcript_path: string;
  auto_success: boolean;
  human_success: boolean;
}

export interface ServerMessage {
  speaker: "user" | "system";
  text: string | null;
  acts: string;
}

export interface SessionView {
  id: string;
  config: string;
  status: "open" | "closed";
  done: boolean;
  instructions: string;
  opening_prompt: string;
  messages: ServerMessage[];
  rating: { success: boolean; stars: number; comment: string } | null;
  transcript_path: string | null;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, method: string, path: string, body?: unknown): Promise<T> {
  let response: Response;
  try {
    response = await fetch(`${base}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`);
  }
  const text = await response.text();
  if (!response.ok) {
    let detail = text;
    try {
      detail = JSON.parse(text).detail ?? text;
    } catch {
      /* plain-text error body */
    }
    throw new ApiError(response.status, detail);
  }
  return JSON.parse(text) as T;
}

export function listConfigs(base: string): Promise<{ configs: string[] }> {
  return request(base, "GET", "/configs");
}

export function createSession(base: string, config: string, seed?: number): Promise<SessionStart> {
  return request(base, "POST", "/sessions", seed === undefined ? { config } : { config, seed });
}

export function postMessage(base: string, id: string, text: string): Promise<MessageReply> {
  return request(base, "POST", `/sessions/${id}/messages`, { text });
}

export function getSession(base: string, id: string): Promise<SessionView> {
  return request(base, "GET", `/sessions/${id}`);
}

export function closeSession(
  base: string,
  id: string,
  rating: { success: boolean; stars: number; comment: string },
): Promise<CloseResult> {
  return request(base, "POST", `/sessions/${id}/close`, rating);
}
