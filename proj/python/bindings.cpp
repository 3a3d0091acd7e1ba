// Python bindings for the main pipeline operations. Structured results cross
// the boundary as JSON text and are decoded by the plansum package.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "plansum/conllu.hpp"
#include "plansum/knn.hpp"
#include "plansum/metrics.hpp"
#include "plansum/oracle.hpp"
#include "plansum/pipeline.hpp"
#include "plansum/plan_format.hpp"
#include "plansum/planner.hpp"
#include "plansum/realizer.hpp"
#include "plansum/synthetic.hpp"
#include "plansum/text.hpp"

namespace py = pybind11;
using namespace plansum;

namespace {

using TupleRow = std::tuple<std::string, std::string, std::string, std::size_t>;

Plan plan_from_rows(const std::vector<TupleRow>& rows) {
  Plan plan;
  for (const auto& [s, p, o, n] : rows) plan.tuples.push_back({s, p, o, n});
  return plan;
}

std::vector<TupleRow> rows_from_plan(const Plan& plan) {
  std::vector<TupleRow> rows;
  for (const auto& t : plan.tuples) rows.emplace_back(t.subject, t.predicate, t.object, t.sentence);
  return rows;
}

std::vector<ParsedSentence> parse_conllu_text(const std::string& text) {
  std::istringstream in(text);
  return read_conllu(in);
}

}  // namespace

PYBIND11_MODULE(_plansum, m) {
  m.doc() = "Plan-guided extractive summarization core";

  // translators run newest first, so the base class registers first
  const auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());

  m.def("segment_sentences", [](const std::string& text) { return segment_sentences(text); }, py::arg("text"));
  m.def("tokenize", [](const std::string& s, bool casefold) { return tokenize(s, casefold); }, py::arg("sentence"),
        py::arg("casefold") = false);

  m.def(
      "rouge_json",
      [](const std::string& candidate, const std::string& reference, bool stem, bool casefold) {
        RougeConfig cfg;
        cfg.stem = stem;
        cfg.casefold = casefold;
        return to_json(rouge_texts(candidate, reference, cfg)).dump();
      },
      py::arg("candidate"), py::arg("reference"), py::arg("stem") = false, py::arg("casefold") = true);

  m.def(
      "oracle_labels",
      [](const std::vector<std::string>& sentences, const std::string& summary, std::size_t cap) {
        CaseRecord rec{"python", sentences, summary, std::nullopt, std::nullopt};
        const auto labels = greedy_oracle_labels(rec, cap);
        return std::make_pair(labels.selected, labels.oracle_score);
      },
      py::arg("sentences"), py::arg("summary"), py::arg("cap") = 45);

  m.def(
      "extract_plan",
      [](const std::string& conllu, bool resolve_pronouns, bool normalize) {
        PlannerOptions opts;
        opts.resolve_pronouns = resolve_pronouns;
        opts.normalize = normalize;
        return rows_from_plan(generate_plan(parse_conllu_text(conllu), opts));
      },
      py::arg("conllu"), py::arg("resolve_pronouns") = false, py::arg("normalize") = false);

  m.def(
      "entity_plan",
      [](const std::string& conllu) { return linearize_entity_plan(extract_entity_chain(parse_conllu_text(conllu))); },
      py::arg("conllu"));

  m.def(
      "linearize_plan",
      [](const std::vector<TupleRow>& rows, bool markers) { return linearize_plan(plan_from_rows(rows), markers); },
      py::arg("tuples"), py::arg("sentence_markers") = false);
  m.def(
      "parse_plan", [](const std::string& text) { return rows_from_plan(parse_plan(text)); }, py::arg("text"));

  m.def(
      "realize",
      [](const std::vector<std::string>& selected, const std::vector<TupleRow>& rows, double min_match,
         bool keep_unplanned) {
        RealizerConfig cfg;
        cfg.min_match = min_match;
        cfg.drop_unplanned = !keep_unplanned;
        const auto out = realize("python", selected, plan_from_rows(rows), cfg);
        return std::make_pair(out.sentences, out.provenance);
      },
      py::arg("selected"), py::arg("tuples"), py::arg("min_match") = 0.3, py::arg("keep_unplanned") = false);

  m.def(
      "knn_topk",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> keys, std::vector<std::int64_t> ids,
         py::array_t<float, py::array::c_style | py::array::forcecast> query, std::size_t k) {
        if (keys.ndim() != 2) throw Error("keys must be a 2-d array");
        const auto dim = static_cast<std::size_t>(keys.shape(1));
        std::vector<float> flat(keys.data(), keys.data() + keys.size());
        const KnnIndex index(dim, std::move(flat), std::move(ids));
        std::vector<std::pair<std::int64_t, double>> out;
        for (const auto& n : index.topk({query.data(), static_cast<std::size_t>(query.size())}, k)) {
          out.emplace_back(n.id, n.score);
        }
        return out;
      },
      py::arg("keys"), py::arg("ids"), py::arg("query"), py::arg("k"));

  m.def(
      "synth",
      [](const std::string& out_dir, std::size_t docs, std::size_t sentences, std::size_t salient,
         std::size_t vocab, std::size_t dim, std::uint64_t seed, const std::string& prefix) {
        SyntheticOptions o;
        o.n_docs = docs;
        o.sentences_per_doc = sentences;
        o.salient_per_doc = salient;
        o.vocab_size = vocab;
        o.seed = seed;
        o.id_prefix = prefix;
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        const auto data = make_synthetic_corpus(o);
        save_corpus(data.corpus, dir / "corpus.jsonl", true);
        save_embeddings(make_synthetic_embeddings(vocab, dim, seed), dir / "embeddings.txt");
        return data.salient;
      },
      py::arg("out_dir"), py::arg("docs") = 10, py::arg("sentences") = 30, py::arg("salient") = 5,
      py::arg("vocab") = 400, py::arg("dim") = 32, py::arg("seed") = 0, py::arg("prefix") = "synth");

  m.def(
      "run_pipeline_json",
      [](const std::string& config_json, const std::string& base) {
        const auto cfg = PipelineConfig::from_json(nlohmann::json::parse(config_json), base);
        py::gil_scoped_release release;
        return run_pipeline(cfg).to_json().dump();
      },
      py::arg("config_json"), py::arg("base") = "");
}
