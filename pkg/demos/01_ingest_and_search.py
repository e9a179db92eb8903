"""Ingest a tiny corpus and run top-k retrieval over it.

Walks the first pipeline stage end to end: documents -> store -> chunks ->
deterministic embeddings -> exact cosine index -> scored hits. Everything
runs offline; run it from the repository root:

    python demos/01_ingest_and_search.py
"""

import tempfile
from pathlib import Path

from kleio import DocumentStore, EmbedderProfile, VectorIndex, embed_texts
from kleio.qa import ingest_and_index

# Retrieval skips chunks under 200 characters, so each document carries a
# couple of sentences of context around its fact.
DOCS = {
    "famine.txt": (
        "The potato blight reached the island in 1845 and the harvest "
        "failed for several seasons in a row. Relief works were slow to "
        "start and badly funded, and emigration surged toward North "
        "America through the port towns. Contemporary letters describe "
        "the quaysides crowded with families waiting for passage."
    ),
    "canals.txt": (
        "Inland navigation expanded rapidly once the main canal opened in "
        "1806. Barges moved grain, coal and passengers between the market "
        "towns, and the towpath villages grew around the locks. The "
        "company minute books record tonnage, tolls and the names of the "
        "lock keepers for every season of operation."
    ),
    "parishes.txt": (
        "Parish registers record baptisms, marriages and burials in neat "
        "columns kept by the incumbent. Genealogists rely on these "
        "volumes when civil records are missing, especially for the "
        "early nineteenth century, and transcription societies have "
        "printed many of the surviving registers with name indexes."
    ),
}

workdir = Path(tempfile.mkdtemp(prefix="kleio-demo-"))
corpus_dir = workdir / "corpus"
corpus_dir.mkdir()
for name, text in DOCS.items():
    (corpus_dir / name).write_text(text)

store = DocumentStore(workdir / "store")
index = VectorIndex(384)
profile = EmbedderProfile()  # deterministic hashed bag-of-tokens

summary = ingest_and_index(corpus_dir, store, index, profile)
print(f"ingested {summary.documents_added} documents, "
      f"indexed {summary.chunks_indexed} chunks")

for query in ("When did the canal open?", "Where are baptisms recorded?"):
    [query_vector] = embed_texts([query], profile)
    hits = index.query_top_k(query_vector, k=2)
    print(f"\nquery: {query}")
    for hit in hits:
        entry = index.get(hit.chunk_id)
        print(f"  {hit.rank}. {entry.doc_title:<10} score={hit.score:+.4f}  "
              f"{entry.chunk.text[:60]}...")
