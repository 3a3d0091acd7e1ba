#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plansum/metrics.hpp"
#include "plansum/planner.hpp"
#include "plansum/realizer.hpp"
#include "plansum/selector.hpp"

namespace plansum {

enum class SelectionMode {
  model,   // trained selector
  all,     // every document sentence (no content selection)
  random,  // seeded random sentences, as many as the greedy oracle picks
  oracle,  // greedy oracle labels
};

std::string to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& s);

struct PipelineConfig {
  std::filesystem::path corpus;  // records to summarize
  std::filesystem::path train_corpus;
  std::filesystem::path validation_corpus;  // optional
  std::filesystem::path embeddings;
  std::filesystem::path output_dir;
  std::filesystem::path selector_checkpoint;  // written when `train` (default <output_dir>/selector.ckpt), else read
  bool train = false;
  SelectorConfig selector;
  std::size_t oracle_branching = 2;
  std::size_t oracle_beam = 4;
  PlannerOptions planner;
  RealizerConfig realizer;
  bool planning = true;
  SelectionMode selection = SelectionMode::model;
  double mix_ratio = 0.5;
  std::optional<std::uint64_t> seed;

  /// Throws plansum::Error naming the first missing seed or unresolved path.
  void validate() const;
  nlohmann::json to_json() const;
  /// Relative paths resolve against `base`.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
  std::string hash() const;
};

struct SelectionStats {
  double mean_selected = 0.0;
  std::map<std::size_t, std::size_t> stop_step_histogram;  // selection size -> records
};

struct RunReport {
  nlohmann::json config;
  EvalReport summary;
  std::optional<RougeTriple> plan_scores;  // mean eval_plan over records with summary parses
  std::size_t plan_records = 0;
  SelectionStats selection;
  std::map<std::string, double> timings_seconds;  // written separately; not part of to_json()

  nlohmann::json to_json() const;
};

/// select -> plan -> realize -> evaluate over `config.corpus`, training the
/// selector first when `config.train`. Writes selections, plans (only when
/// planning), summaries, plan_training, report.json and timings.json into the
/// output directory.
/// Failures are rethrown as StageError.
RunReport run_pipeline(const PipelineConfig& config);

struct StageError : Error {
  StageError(const std::string& stage, const std::string& record, const std::string& cause);
};

/// Seeded random selection of `count` sentences in document order.
std::vector<std::size_t> random_selection(std::size_t n_sentences, std::size_t count, std::uint64_t seed);

/// Intermediate files: the first line is {"_header": {"stage", "config_hash"}}.
void write_jsonl(const std::filesystem::path& path, const std::string& stage, const std::string& config_hash,
                 const std::vector<nlohmann::json>& rows);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
nlohmann::json read_jsonl_header(const std::filesystem::path& path);

/// Oracle episodes for every record, keyed by id.
std::map<std::string, std::vector<Episode>> prepare_episodes(const Corpus& corpus, std::size_t branching,
                                                             std::size_t beam, std::size_t cap);

std::string write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace plansum
