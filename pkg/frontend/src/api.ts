/** Thin typed client for the scheduling service; one method per endpoint. */

import type {
  ApiErrorBody,
  FreeBusyResponse,
  MessageResponse,
  OpenSessionBody,
  OpenSessionResponse,
  PersonDto,
  SessionDoc,
} from './types.js';

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let body: ApiErrorBody;
    try {
      body = (await response.json()) as ApiErrorBody;
    } catch {
      body = { code: 'http_error', message: `${response.status} ${response.statusText}` };
    }
    throw new ApiError(response.status, body);
  }
  return (await response.json()) as T;
}

function post(payload: unknown): RequestInit {
  return {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(payload),
  };
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  openSession(body: OpenSessionBody): Promise<OpenSessionResponse> {
    return request(`${this.base}/sessions`, post(body));
  }

  sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return request(`${this.base}/sessions/${sessionId}/messages`, post({ text }));
  }

  schedule(sessionId: string, suggestionIndex: number): Promise<{ status: string }> {
    return request(`${this.base}/sessions/${sessionId}/schedule`, post({ suggestion_index: suggestionIndex }));
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return request(`${this.base}/sessions/${sessionId}`);
  }

  getFreeBusy(person: string, from: string, to: string): Promise<FreeBusyResponse> {
    const q = `person=${encodeURIComponent(person)}&from=${encodeURIComponent(from)}&to=${encodeURIComponent(to)}`;
    return request(`${this.base}/universe/freebusy?${q}`);
  }

  getPeople(): Promise<PersonDto[]> {
    return request(`${this.base}/universe/people`);
  }
}
