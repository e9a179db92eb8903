// Typed client for the /api/* JSON endpoints.

export interface SourceView {
  chunk_id: string;
  doc_title: string;
  score: number;
  rank: number;
  snippet: string;
  char_start: number;
  char_end: number;
}

export interface AskResponse {
  answer: string;
  sources: SourceView[];
  grounding_score: number;
  grounded: boolean;
  session_id: string;
}

export interface ChunkResponse {
  doc_title: string;
  text: string;
  char_start: number;
  char_end: number;
  page_hint: number;
}

export interface IngestResponse {
  documents_added: number;
  chunks_indexed: number;
  failures?: { path: string; error: string }[];
}

export interface HealthResponse {
  status: string;
  index_size: number;
  embedder_backend: string;
  llm_backend: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep statusText
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  ask(question: string, k: number, sessionId?: string): Promise<AskResponse> {
    return request<AskResponse>(`${this.baseUrl}/api/ask`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question, k, session_id: sessionId ?? null }),
    });
  }

  chunk(chunkId: string): Promise<ChunkResponse> {
    return request<ChunkResponse>(
      `${this.baseUrl}/api/chunk/${encodeURIComponent(chunkId)}`,
    );
  }

  ingest(path: string): Promise<IngestResponse> {
    return request<IngestResponse>(`${this.baseUrl}/api/ingest`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ path }),
    });
  }

  health(): Promise<HealthResponse> {
    return request<HealthResponse>(`${this.baseUrl}/api/health`);
  }
}
