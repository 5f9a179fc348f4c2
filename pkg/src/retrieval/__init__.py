"""Corpus ingestion, lexical BM25 retrieval and the remote retriever client."""
