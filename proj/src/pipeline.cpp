#include "plansum/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "plansum/error.hpp"
#include "plansum/oracle.hpp"
#include "plansum/plan_format.hpp"
#include "plansum/rng.hpp"

namespace plansum {

namespace fs = std::filesystem;

std::string to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::model: return "model";
    case SelectionMode::all: return "all";
    case SelectionMode::random: return "random";
    case SelectionMode::oracle: return "oracle";
  }
  return "model";
}

SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "model") return SelectionMode::model;
  if (s == "all") return SelectionMode::all;
  if (s == "random") return SelectionMode::random;
  if (s == "oracle") return SelectionMode::oracle;
  throw Error("unknown selection mode '" + s + "' (expected model, all, random or oracle)");
}

StageError::StageError(const std::string& stage, const std::string& record, const std::string& cause)
    : Error("stage " + stage + (record.empty() ? "" : ", record " + record) + ": " + cause) {}

void PipelineConfig::validate() const {
  if (!seed) throw Error("config: seed is required");
  auto require = [](const fs::path& p, const char* what) {
    if (p.empty()) throw Error(std::string("config: ") + what + " path is required");
    if (!fs::exists(p)) throw Error(std::string("config: ") + what + " not found: " + p.string());
  };
  require(corpus, "corpus");
  if (output_dir.empty()) throw Error("config: output_dir is required");
  if (selection == SelectionMode::model) {
    require(embeddings, "embeddings");
    if (train) {
      require(train_corpus, "train_corpus");
      if (!validation_corpus.empty()) require(validation_corpus, "validation_corpus");
    } else {
      require(selector_checkpoint, "selector_checkpoint");
    }
  }
  if (!(mix_ratio >= 0.0 && mix_ratio <= 1.0)) throw Error("config: mix_ratio must lie in [0, 1]");
  if (!(realizer.min_match >= 0.0 && realizer.min_match <= 1.0)) throw Error("config: min_match must lie in [0, 1]");
  if (oracle_branching == 0 || oracle_beam == 0) throw Error("config: oracle branching and beam must be positive");
  selector.validate();
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j = {
      {"corpus", corpus.generic_string()},
      {"train_corpus", train_corpus.generic_string()},
      {"validation_corpus", validation_corpus.generic_string()},
      {"embeddings", embeddings.generic_string()},
      {"output_dir", output_dir.generic_string()},
      {"selector_checkpoint", selector_checkpoint.generic_string()},
      {"train", train},
      {"selector", selector.to_json()},
      {"oracle_branching", oracle_branching},
      {"oracle_beam", oracle_beam},
      {"planner", {{"resolve_pronouns", planner.resolve_pronouns}, {"normalize", planner.normalize}}},
      {"realizer", {{"min_match", realizer.min_match}, {"drop_unplanned", realizer.drop_unplanned}}},
      {"planning", planning},
      {"selection", to_string(selection)},
      {"mix_ratio", mix_ratio},
  };
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const fs::path& base) {
  PipelineConfig c;
  auto path = [&](const char* key) -> fs::path {
    const auto s = j.value(key, std::string{});
    if (s.empty()) return {};
    fs::path p(s);
    return p.is_relative() && !base.empty() ? base / p : p;
  };
  c.corpus = path("corpus");
  c.train_corpus = path("train_corpus");
  c.validation_corpus = path("validation_corpus");
  c.embeddings = path("embeddings");
  c.output_dir = path("output_dir");
  c.selector_checkpoint = path("selector_checkpoint");
  c.train = j.value("train", false);
  if (j.contains("selector")) c.selector = SelectorConfig::from_json(j.at("selector"));
  c.oracle_branching = j.value("oracle_branching", c.oracle_branching);
  c.oracle_beam = j.value("oracle_beam", c.oracle_beam);
  if (j.contains("planner")) {
    c.planner.resolve_pronouns = j["planner"].value("resolve_pronouns", false);
    c.planner.normalize = j["planner"].value("normalize", false);
  }
  if (j.contains("realizer")) {
    c.realizer.min_match = j["realizer"].value("min_match", c.realizer.min_match);
    c.realizer.drop_unplanned = j["realizer"].value("drop_unplanned", c.realizer.drop_unplanned);
  }
  c.planning = j.value("planning", true);
  c.selection = selection_mode_from_string(j.value("selection", std::string("model")));
  c.mix_ratio = j.value("mix_ratio", c.mix_ratio);
  if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
  return c;
}

std::string PipelineConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json().dump())));
  return buf;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["config"] = config;
  j["summary"] = summary.to_json();
  j["plan"] = {{"records", plan_records},
               {"mean", plan_scores ? plansum::to_json(*plan_scores) : nlohmann::json(nullptr)}};
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [k, v] : selection.stop_step_histogram) hist[std::to_string(k)] = v;
  j["selection"] = {{"mean_selected", selection.mean_selected}, {"stop_step_histogram", hist}};
  return j;
}

std::vector<std::size_t> random_selection(std::size_t n_sentences, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(n_sentences);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(std::min(count, n_sentences));
  std::sort(idx.begin(), idx.end());
  return idx;
}

void write_jsonl(const fs::path& path, const std::string& stage, const std::string& config_hash,
                 const std::vector<nlohmann::json>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << nlohmann::json{{"_header", {{"stage", stage}, {"config_hash", config_hash}}}}.dump() << '\n';
  for (const auto& r : rows) out << r.dump() << '\n';
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
    if (j.is_object() && j.contains("_header")) continue;
    rows.push_back(std::move(j));
  }
  return rows;
}

nlohmann::json read_jsonl_header(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) throw Error("cannot read " + path.string());
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("_header")) throw Error(path.string() + " has no header line");
  return j["_header"];
}

std::string write_json_file(const fs::path& path, const nlohmann::json& j) {
  const auto text = j.dump(2) + "\n";
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  return text;
}

std::map<std::string, std::vector<Episode>> prepare_episodes(const Corpus& corpus, std::size_t branching,
                                                             std::size_t beam, std::size_t cap) {
  std::map<std::string, std::vector<Episode>> out;
  for (const auto& rec : corpus) out[rec.id] = generate_episodes(rec, branching, beam, cap);
  return out;
}

namespace {

class Timer {
 public:
  explicit Timer(std::map<std::string, double>& sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    sink_[name_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

template <class F>
auto stage(const std::string& name, const std::string& record, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, record, e.what());
  }
}

std::vector<ParsedSentence> pick_parses(const CaseRecord& rec, const std::vector<std::size_t>& idx) {
  if (!rec.doc_parses) throw Error("record has no document parses");
  std::vector<ParsedSentence> out;
  for (auto i : idx) out.push_back((*rec.doc_parses)[i]);
  return out;
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config) {
  stage("config", "", [&] { config.validate(); });
  const std::uint64_t seed = *config.seed;
  const std::string hash = config.hash();
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);

  RunReport report;
  report.config = config.to_json();
  report.config.erase("output_dir");  // reports compare equal across output locations
  auto& timings = report.timings_seconds;

  const Corpus corpus = stage("load", "", [&] { return load_corpus(config.corpus); });

  std::optional<SelectorModel> model;
  std::optional<EmbeddingTable> embeddings;
  if (config.selection == SelectionMode::model) {
    Timer t(timings, "train");
    SelectorConfig scfg = config.selector;
    scfg.seed = derive_seed(seed, "selector");
    if (config.train) {
      embeddings = stage("load", "", [&] { return load_embeddings(config.embeddings, scfg.embed_dim); });
      const Corpus train = stage("load", "", [&] { return load_corpus(config.train_corpus); });
      std::optional<Corpus> validation;
      if (!config.validation_corpus.empty()) {
        validation = stage("load", "", [&] { return load_corpus(config.validation_corpus); });
      }
      const auto episodes = stage("prepare-oracle", "", [&] {
        return prepare_episodes(train, config.oracle_branching, config.oracle_beam, scfg.max_extract);
      });
      TrainOptions opts;
      if (validation) opts.validation = &*validation;
      model = stage("train-selector", "", [&] { return train_reinforce(train, *embeddings, episodes, scfg, opts); });
      const auto ckpt = config.selector_checkpoint.empty() ? out_dir / "selector.ckpt" : config.selector_checkpoint;
      save_selector(*model, ckpt);
    } else {
      // the checkpoint fixes the embedding width
      model = stage("load", "", [&] { return load_selector(config.selector_checkpoint); });
      embeddings = stage("load", "", [&] { return load_embeddings(config.embeddings, model->config.embed_dim); });
    }
  }

  // Selection.
  std::vector<ExtractLabels> selections;
  std::vector<ExtractLabels> oracle_labels;
  {
    Timer t(timings, "select");
    const auto cap = config.selector.max_extract;
    for (std::size_t r = 0; r < corpus.size(); ++r) {
      const auto& rec = corpus[r];
      stage("select", rec.id, [&] {
        oracle_labels.push_back(greedy_oracle_labels(rec, cap));
        ExtractLabels sel;
        switch (config.selection) {
          case SelectionMode::model:
            sel = select(rec, *model, *embeddings);
            break;
          case SelectionMode::all:
            sel.id = rec.id;
            sel.selected.resize(rec.doc_sentences.size());
            std::iota(sel.selected.begin(), sel.selected.end(), std::size_t{0});
            break;
          case SelectionMode::random: {
            sel.id = rec.id;
            const auto count = std::max<std::size_t>(1, oracle_labels.back().selected.size());
            sel.selected = random_selection(rec.doc_sentences.size(), count, derive_seed(seed, "random", r));
            break;
          }
          case SelectionMode::oracle:
            sel = oracle_labels.back();
            break;
        }
        sel.oracle_score = TokenizedDocument(rec).rouge2(sel.selected).f1;
        selections.push_back(std::move(sel));
      });
    }
    std::vector<nlohmann::json> rows;
    for (const auto& s : selections) rows.push_back(to_json(s));
    write_jsonl(out_dir / "selections.jsonl", "select", hash, rows);
  }

  // Planning; skipped entirely when disabled so unparsed corpora still run.
  std::vector<Plan> plans;
  if (config.planning) {
    Timer t(timings, "plan");
    std::vector<nlohmann::json> rows;
    RougeTriple sum{};
    for (std::size_t r = 0; r < corpus.size(); ++r) {
      const auto& rec = corpus[r];
      stage("plan", rec.id, [&] {
        plans.push_back(generate_plan(pick_parses(rec, selections[r].selected), config.planner));
        nlohmann::json row = {{"id", rec.id}, {"tuples", to_json(plans.back())}, {"linearized", linearize_plan(plans.back())}};
        if (rec.summary_parses) {
          const auto gold = build_gold_plan(*rec.summary_parses, config.planner);
          const auto scores = eval_plan(plans.back(), gold);
          row["gold_linearized"] = linearize_plan(gold);
          row["scores"] = to_json(scores);
          for (auto [acc, x] : {std::pair{&sum.rouge1, &scores.rouge1}, std::pair{&sum.rouge2, &scores.rouge2},
                                std::pair{&sum.rougeL, &scores.rougeL}}) {
            acc->precision += x->precision;
            acc->recall += x->recall;
            acc->f1 += x->f1;
          }
          ++report.plan_records;
        }
        rows.push_back(std::move(row));
      });
    }
    if (report.plan_records > 0) {
      const double n = static_cast<double>(report.plan_records);
      for (auto* x : {&sum.rouge1, &sum.rouge2, &sum.rougeL}) {
        x->precision /= n;
        x->recall /= n;
        x->f1 /= n;
      }
      report.plan_scores = sum;
    }
    write_jsonl(out_dir / "plans.jsonl", "extract-plan", hash, rows);
  }

  // Realization.
  std::map<std::string, std::string> candidates;
  std::map<std::string, std::string> references;
  {
    Timer t(timings, "realize");
    std::vector<nlohmann::json> rows;
    for (std::size_t r = 0; r < corpus.size(); ++r) {
      const auto& rec = corpus[r];
      stage("realize", rec.id, [&] {
        std::vector<std::string> selected;
        for (auto i : selections[r].selected) selected.push_back(rec.doc_sentences[i]);
        RealizedSummary out;
        if (config.planning) {
          out = realize(rec.id, selected, plans[r], config.realizer);
        } else {
          out.id = rec.id;
          out.sentences = selected;
          out.provenance.resize(selected.size());
          std::iota(out.provenance.begin(), out.provenance.end(), std::size_t{0});
        }
        candidates[rec.id] = out.text();
        references[rec.id] = rec.gold_summary;
        rows.push_back(to_json(out));
      });
    }
    write_jsonl(out_dir / "summaries.jsonl", "realize", hash, rows);
  }

  {
    Timer t(timings, "evaluate");
    report.summary = stage("evaluate", "", [&] { return evaluate_corpus(candidates, references); });
  }

  // Plan-generator training pairs mixing oracle and selector inputs.
  {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> oracle_inputs;
    std::map<std::string, std::vector<std::size_t>> model_inputs;
    for (std::size_t r = 0; r < corpus.size(); ++r) {
      oracle_inputs.emplace_back(corpus[r].id, oracle_labels[r].selected);
      model_inputs[corpus[r].id] = selections[r].selected;
    }
    const auto hybrid = build_hybrid_set(oracle_inputs, model_inputs, config.mix_ratio, derive_seed(seed, "hybrid"));
    std::vector<nlohmann::json> rows;
    for (std::size_t r = 0; r < hybrid.pairs.size(); ++r) {
      auto row = to_json(hybrid.pairs[r]);
      if (corpus[r].summary_parses) row["target"] = linearize_plan(build_gold_plan(*corpus[r].summary_parses, config.planner));
      rows.push_back(std::move(row));
    }
    write_jsonl(out_dir / "plan_training.jsonl", "hybrid", hash, rows);
  }

  double total = 0.0;
  for (const auto& s : selections) {
    total += static_cast<double>(s.selected.size());
    ++report.selection.stop_step_histogram[s.selected.size()];
  }
  report.selection.mean_selected = selections.empty() ? 0.0 : total / static_cast<double>(selections.size());

  write_json_file(out_dir / "report.json", report.to_json());
  nlohmann::json tj = nlohmann::json::object();
  for (const auto& [k, v] : timings) tj[k] = v;
  write_json_file(out_dir / "timings.json", tj);
  return report;
}

}  // namespace plansum
