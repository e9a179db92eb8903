"""Ask a question and inspect the answer's sources and grounding score.

Uses the corpus-aware mock model, which extracts the best-overlapping
sentence from the retrieved chunks (or abstains), so the full
retrieve-prompt-answer loop runs without any model weights:

    python demos/02_ask_with_sources.py
"""

import tempfile
from pathlib import Path

from kleio import (
    DocumentStore,
    EmbedderProfile,
    MockChatBackend,
    ModelProfile,
    VectorIndex,
    ask,
)
from kleio.qa import ingest_and_index

workdir = Path(tempfile.mkdtemp(prefix="kleio-demo-"))
corpus_dir = workdir / "corpus"
corpus_dir.mkdir()
(corpus_dir / "orchard.txt").write_text(
    "The walled orchard beside the rectory was planted in 1742 by the "
    "incumbent's brother. Apples and quinces from the orchard supplied the "
    "market in the next valley, and the account books survive in the "
    "diocesan archive with prices noted in a careful hand."
)
(corpus_dir / "bridge.txt").write_text(
    "A three-arched stone bridge replaced the ford in 1788 after two "
    "carters drowned in the spring flood. The county surveyor recorded "
    "the span measurements in his report book, tolls were collected at "
    "the eastern end until the charter lapsed, and the toll cottage "
    "still stands beside the abutment."
)

store = DocumentStore(workdir / "store")
index = VectorIndex(384)
ingest_and_index(corpus_dir, store, index, EmbedderProfile())

for question, k in [
    ("When was the walled orchard planted?", 2),
    ("When was the stone bridge built?", 2),
    ("Who painted the chapel ceiling?", 2),   # nothing relevant: abstains
    ("When was the orchard planted?", 0),     # no sources supplied at k=0
]:
    answer = ask(question, k, index, EmbedderProfile(), ModelProfile(),
                 chat_backend=MockChatBackend(corpus_aware=True))
    print(f"Q ({k} chunks): {question}")
    print(f"A: {answer.text}")
    print(f"   grounding={answer.grounding_score:.2f} grounded={answer.grounded}")
    for source in answer.sources:
        print(f"   [{source.rank}] {source.doc_title} "
              f"({source.chunk_id}, {source.score:.3f})")
    print()
