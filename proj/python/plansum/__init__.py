"""Plan-guided extractive summarization: Python front end to the C++ core."""

import json

try:
    from . import _plansum
except ImportError:  # build tree: the extension sits beside the package
    import _plansum

Error = _plansum.Error
ParseError = _plansum.ParseError
entity_plan = _plansum.entity_plan
extract_plan = _plansum.extract_plan
knn_topk = _plansum.knn_topk
linearize_plan = _plansum.linearize_plan
oracle_labels = _plansum.oracle_labels
parse_plan = _plansum.parse_plan
realize = _plansum.realize
segment_sentences = _plansum.segment_sentences
synth = _plansum.synth
tokenize = _plansum.tokenize


def rouge(candidate, reference, stem=False, casefold=True):
    """ROUGE-1/2/L precision, recall and F1 as nested dicts."""
    return json.loads(_plansum.rouge_json(candidate, reference, stem, casefold))


def run_pipeline(config, base=""):
    """Runs the full pipeline from a config dict; returns the report dict."""
    return json.loads(_plansum.run_pipeline_json(json.dumps(config), str(base)))


__all__ = [
    "Error",
    "ParseError",
    "entity_plan",
    "extract_plan",
    "knn_topk",
    "linearize_plan",
    "oracle_labels",
    "parse_plan",
    "realize",
    "rouge",
    "run_pipeline",
    "segment_sentences",
    "synth",
    "tokenize",
]
