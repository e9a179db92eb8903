// Single-page layout: chat transcript + composer on the left, corpus
// panel (ingest form, index status) on the right. Turns are append-only;
// a rendered turn is never touched again, so the transcript survives any
// later failure. Chunk text loads lazily through a per-chunk cache, so
// expanding a source card fetches /api/chunk at most once per chunk.

import { ApiClient, ApiError, AskResponse, SourceView } from "./api";

export interface App {
  root: HTMLElement;
  sendQuestion(text: string, k: number): Promise<void>;
  ingest(path: string): Promise<void>;
  refreshHealth(): Promise<void>;
  currentK(): number;
  sessionId(): string | undefined;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createApp(root: HTMLElement, api: ApiClient): App {
  root.innerHTML = "";
  const layout = el("div", "layout");
  root.appendChild(layout);

  // --- chat pane ---
  const chatPane = el("section", "chat-pane");
  const transcript = el("div", "transcript");
  transcript.setAttribute("data-testid", "transcript");
  const composer = el("form", "composer");
  const questionInput = el("textarea", "question-input");
  questionInput.placeholder = "Ask the corpus a question…";
  questionInput.rows = 2;
  const kSelect = el("select", "k-select");
  for (const value of ["0", "4", "8", "custom"]) {
    const option = el("option", undefined, value === "custom" ? "custom…" : `k=${value}`);
    option.value = value;
    kSelect.appendChild(option);
  }
  kSelect.value = "4";
  const kCustom = el("input", "k-custom") as HTMLInputElement;
  kCustom.type = "number";
  kCustom.min = "0";
  kCustom.value = "4";
  kCustom.hidden = true;
  kSelect.addEventListener("change", () => {
    kCustom.hidden = kSelect.value !== "custom";
  });
  const askButton = el("button", "ask-button", "Ask");
  askButton.type = "submit";
  composer.append(questionInput, kSelect, kCustom, askButton);
  chatPane.append(transcript, composer);

  // --- corpus pane ---
  const corpusPane = el("aside", "corpus-pane");
  corpusPane.appendChild(el("h2", undefined, "Corpus"));
  const healthLine = el("div", "health-line", "index: …");
  const ingestForm = el("form", "ingest-form");
  const ingestPath = el("input", "ingest-path") as HTMLInputElement;
  ingestPath.placeholder = "/path/to/documents";
  const ingestButton = el("button", "ingest-button", "Ingest");
  ingestButton.type = "submit";
  ingestForm.append(ingestPath, ingestButton);
  const ingestResult = el("div", "ingest-result");
  corpusPane.append(healthLine, ingestForm, ingestResult);

  layout.append(chatPane, corpusPane);

  // --- state ---
  let sessionId: string | undefined;
  let inFlight = false;
  const chunkCache = new Map<string, Promise<{ doc_title: string; text: string }>>();

  function chunkText(chunkId: string) {
    let cached = chunkCache.get(chunkId);
    if (!cached) {
      cached = api.chunk(chunkId);
      chunkCache.set(chunkId, cached);
    }
    return cached;
  }

  function setBusy(busy: boolean) {
    inFlight = busy;
    askButton.disabled = busy;
    questionInput.disabled = busy;
  }

  function renderSourceCard(source: SourceView): HTMLElement {
    const card = el("div", "source-card");
    card.setAttribute("data-chunk-id", source.chunk_id);
    const header = el("button", "source-header");
    header.type = "button";
    header.append(
      el("span", "source-title", source.doc_title),
      el("span", "source-score", source.score.toFixed(3)),
      el("span", "source-snippet", source.snippet),
    );
    const body = el("div", "chunk-text");
    body.hidden = true;
    let loaded = false;
    header.addEventListener("click", async () => {
      if (!body.hidden) {
        body.hidden = true;
        return;
      }
      body.hidden = false;
      if (loaded) return;
      loaded = true;
      try {
        const chunk = await chunkText(source.chunk_id);
        body.textContent = chunk.text;
      } catch (error) {
        body.textContent = "chunk unavailable";
        body.classList.add("chunk-missing");
      }
    });
    card.append(header, body);
    return card;
  }

  function renderAnswerTurn(question: string, response: AskResponse) {
    const turn = el("article", "turn");
    turn.appendChild(el("div", "question", question));
    turn.appendChild(el("div", "answer", response.answer));
    const badge = el(
      "span",
      response.grounded ? "badge grounded" : "badge ungrounded",
      response.grounded
        ? `grounded ${(response.grounding_score * 100).toFixed(0)}%`
        : "ungrounded",
    );
    turn.appendChild(badge);
    const sources = el("div", "sources");
    for (const source of response.sources) {
      sources.appendChild(renderSourceCard(source));
    }
    turn.appendChild(sources);
    transcript.appendChild(turn);
  }

  function renderErrorTurn(question: string, k: number, message: string) {
    const turn = el("article", "turn error");
    turn.appendChild(el("div", "question", question));
    turn.appendChild(el("div", "error-message", message));
    const retry = el("button", "retry-button", "Retry");
    retry.type = "button";
    retry.addEventListener("click", () => {
      void sendQuestion(question, k);
    });
    turn.appendChild(retry);
    transcript.appendChild(turn);
  }

  async function sendQuestion(text: string, k: number): Promise<void> {
    const question = text.trim();
    if (!question || inFlight) return;
    setBusy(true);
    try {
      const response = await api.ask(question, k, sessionId);
      sessionId = response.session_id;
      renderAnswerTurn(question, response);
    } catch (error) {
      const message =
        error instanceof ApiError
          ? `The server answered ${error.status}: ${error.message}`
          : "Could not reach the server.";
      renderErrorTurn(question, k, message);
    } finally {
      setBusy(false);
      transcript.scrollTop = transcript.scrollHeight;
    }
  }

  function currentK(): number {
    const raw = kSelect.value === "custom" ? kCustom.value : kSelect.value;
    const k = parseInt(raw, 10);
    return Number.isFinite(k) && k >= 0 ? k : 0;
  }

  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = questionInput.value;
    questionInput.value = "";
    void sendQuestion(text, currentK());
  });

  async function ingest(path: string): Promise<void> {
    const target = path.trim();
    if (!target) return;
    ingestResult.textContent = "ingesting…";
    try {
      const result = await api.ingest(target);
      ingestResult.textContent =
        `added ${result.documents_added} documents, ` +
        `indexed ${result.chunks_indexed} chunks`;
      await refreshHealth();
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        ingestResult.textContent = `path not found: ${target}`;
      } else if (error instanceof ApiError && error.status === 409) {
        ingestResult.textContent = "index is locked by another writer; try again";
      } else {
        ingestResult.textContent = "ingestion failed: server unreachable";
      }
    }
  }

  ingestForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void ingest(ingestPath.value);
  });

  async function refreshHealth(): Promise<void> {
    try {
      const health = await api.health();
      healthLine.textContent =
        `index: ${health.index_size} chunks · embedder: ` +
        `${health.embedder_backend} · model: ${health.llm_backend}`;
    } catch {
      healthLine.textContent = "index: server unreachable";
    }
  }

  return {
    root,
    sendQuestion,
    ingest,
    refreshHealth,
    currentK,
    sessionId: () => sessionId,
  };
}
