import type { ChatReply } from './types';

export class ApiFailure extends Error {
  readonly status: number;
  readonly category: string;

  constructor(status: number, category: string, message: string) {
    super(message);
    this.status = status;
    this.category = category;
  }
}

async function post(url: string, body: unknown): Promise<ChatReply> {
  const response = await fetch(url, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
  });
  const payload = await response.json().catch(() => null);
  if (!response.ok) {
    const error = payload?.error ?? { category: 'transport', message: response.statusText };
    throw new ApiFailure(response.status, error.category, error.message);
  }
  return payload as ChatReply;
}

export interface ApiClient {
  chat(message: string, sessionId: string | null): Promise<ChatReply>;
  regenerate(sessionId: string): Promise<ChatReply>;
}

export class Api implements ApiClient {
  constructor(private readonly base: string = '') {}

  chat(message: string, sessionId: string | null): Promise<ChatReply> {
    const body: Record<string, unknown> = { message };
    if (sessionId) body.session_id = sessionId;
    return post(`${this.base}/api/chat`, body);
  }

  regenerate(sessionId: string): Promise<ChatReply> {
    return post(`${this.base}/api/regenerate`, { session_id: sessionId });
  }

  async health(): Promise<{ status: string; provider_reachable: boolean }> {
    const response = await fetch(`${this.base}/api/health`);
    return response.json();
  }
}
