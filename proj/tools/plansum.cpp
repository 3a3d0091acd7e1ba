// Command-line front end: one subcommand per pipeline stage.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "plansum/conllu.hpp"
#include "plansum/oracle.hpp"
#include "plansum/pipeline.hpp"
#include "plansum/plan_format.hpp"
#include "plansum/synthetic.hpp"

namespace fs = std::filesystem;
using namespace plansum;
using nlohmann::json;

namespace {

std::string file_hash(const std::vector<std::string>& parts) {
  std::string joined;
  for (const auto& p : parts) joined += p + '\n';
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(joined)));
  return buf;
}

std::map<std::string, ExtractLabels> read_selections(const fs::path& path) {
  std::map<std::string, ExtractLabels> out;
  for (const auto& row : read_jsonl(path)) {
    auto labels = labels_from_json(row);
    out[labels.id] = std::move(labels);
  }
  return out;
}

const CaseRecord& record_or_throw(const Corpus& corpus, const std::string& id) {
  const auto* rec = find_record(corpus, id);
  if (rec == nullptr) throw Error("record " + id + " is not in the corpus");
  return *rec;
}

std::vector<ParsedSentence> parses_for(const CaseRecord& rec, const std::vector<std::size_t>& idx) {
  if (!rec.doc_parses) throw Error("record " + rec.id + " has no document parses");
  std::vector<ParsedSentence> out;
  for (auto i : idx) {
    if (i >= rec.doc_parses->size()) throw Error("record " + rec.id + ": selection index out of range");
    out.push_back((*rec.doc_parses)[i]);
  }
  return out;
}

SelectorConfig selector_config(const std::string& config_path) {
  if (config_path.empty()) return {};
  std::ifstream in(config_path);
  if (!in) throw Error("cannot read " + config_path);
  const auto j = json::parse(in);
  return SelectorConfig::from_json(j.contains("selector") ? j.at("selector") : j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan-guided extractive summarization pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic salience corpus with parses and embeddings");
  SyntheticOptions synth_opts;
  std::uint64_t synth_seed = 0;
  std::size_t synth_dim = 32;
  std::string synth_out;
  synth->add_option("--docs", synth_opts.n_docs, "Number of documents")->capture_default_str();
  synth->add_option("--sentences", synth_opts.sentences_per_doc, "Sentences per document")->capture_default_str();
  synth->add_option("--salient", synth_opts.salient_per_doc, "Salient sentences per document")->capture_default_str();
  synth->add_option("--vocab", synth_opts.vocab_size, "Content vocabulary size")->capture_default_str();
  synth->add_option("--dim", synth_dim, "Embedding dimension")->capture_default_str();
  synth->add_option("--prefix", synth_opts.id_prefix, "Record id prefix")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Random seed")->required();
  synth->add_option("--out-dir", synth_out, "Output directory")->required();

  // prepare-oracle
  auto* prep = app.add_subcommand("prepare-oracle", "Greedy oracle labels and high-reward episodes");
  std::string prep_corpus, prep_labels, prep_episodes;
  std::size_t prep_cap = 45, prep_branching = 2, prep_beam = 4;
  prep->add_option("--corpus", prep_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  prep->add_option("--labels-out", prep_labels, "Oracle labels JSONL")->required();
  prep->add_option("--episodes-out", prep_episodes, "Episodes JSONL")->required();
  prep->add_option("--cap", prep_cap, "Maximum sentences per selection")->capture_default_str();
  prep->add_option("--branching", prep_branching, "Episode search branching factor")->capture_default_str();
  prep->add_option("--beam", prep_beam, "Episode search beam width")->capture_default_str();

  // train-selector
  auto* train = app.add_subcommand("train-selector", "REINFORCE training of the content selector");
  std::string train_corpus, train_episodes, train_embeddings, train_validation, train_config, train_out, train_resume;
  std::uint64_t train_seed = 0;
  std::optional<std::size_t> train_epochs;
  train->add_option("--corpus", train_corpus, "Training corpus JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--episodes", train_episodes, "Episodes JSONL from prepare-oracle")->required()->check(CLI::ExistingFile);
  train->add_option("--embeddings", train_embeddings, "Word embedding text file")->required()->check(CLI::ExistingFile);
  train->add_option("--validation", train_validation, "Validation corpus JSONL")->check(CLI::ExistingFile);
  train->add_option("--config", train_config, "Selector config JSON")->check(CLI::ExistingFile);
  train->add_option("--epochs", train_epochs, "Override the configured epoch count");
  train->add_option("--resume", train_resume, "Continue from this checkpoint")->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Checkpoint to write")->required();
  train->add_option("--seed", train_seed, "Random seed")->required();

  // select
  auto* sel = app.add_subcommand("select", "Extract salient sentences with a trained selector");
  std::string sel_corpus, sel_embeddings, sel_checkpoint, sel_out;
  sel->add_option("--corpus", sel_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  sel->add_option("--embeddings", sel_embeddings, "Word embedding text file")->required()->check(CLI::ExistingFile);
  sel->add_option("--checkpoint", sel_checkpoint, "Selector checkpoint")->required()->check(CLI::ExistingFile);
  sel->add_option("--out", sel_out, "Selections JSONL")->required();

  // extract-plan
  auto* plan = app.add_subcommand("extract-plan", "Event plans from selected sentences or gold summaries");
  std::string plan_corpus, plan_selections, plan_out, plan_text_out;
  bool plan_gold = false, plan_entities = false, plan_markers = false;
  PlannerOptions planner_opts;
  plan->add_option("--corpus", plan_corpus, "Corpus JSONL with parses")->required()->check(CLI::ExistingFile);
  plan->add_option("--selections", plan_selections, "Selections JSONL")->check(CLI::ExistingFile);
  plan->add_flag("--gold", plan_gold, "Plan the gold summaries instead of selections");
  plan->add_flag("--coref", planner_opts.resolve_pronouns, "Resolve subject pronouns");
  plan->add_flag("--normalize", planner_opts.normalize, "Drop auxiliaries and determiners");
  plan->add_flag("--entities", plan_entities, "Also emit entity chains");
  plan->add_flag("--sentence-markers", plan_markers, "Separate source sentences with |||");
  plan->add_option("--out", plan_out, "Plans JSONL")->required();
  plan->add_option("--text-out", plan_text_out, "Linearized plans, one line per record");

  // realize
  auto* real = app.add_subcommand("realize", "Order and filter selected sentences by their plan");
  std::string real_corpus, real_selections, real_plans, real_out;
  RealizerConfig realizer_cfg;
  bool real_keep = false;
  real->add_option("--corpus", real_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  real->add_option("--selections", real_selections, "Selections JSONL")->required()->check(CLI::ExistingFile);
  real->add_option("--plans", real_plans, "Plans JSONL")->required()->check(CLI::ExistingFile);
  real->add_option("--min-match", realizer_cfg.min_match, "Minimum tuple coverage for alignment")->capture_default_str();
  real->add_flag("--keep-unplanned", real_keep, "Append sentences that match no tuple");
  real->add_option("--out", real_out, "Summaries JSONL")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "ROUGE-1/2/L of candidate summaries against references");
  std::string eval_corpus, eval_candidates, eval_out;
  RougeConfig rouge_cfg;
  bool eval_no_casefold = false;
  eval->add_option("--corpus", eval_corpus, "Reference corpus JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--candidates", eval_candidates, "JSONL of {id, summary}")->required()->check(CLI::ExistingFile);
  eval->add_flag("--stem", rouge_cfg.stem, "Porter-stem tokens");
  eval->add_flag("--no-casefold", eval_no_casefold, "Keep case when comparing");
  eval->add_option("--out", eval_out, "Write the report here instead of stdout");

  // run
  auto* run = app.add_subcommand("run", "Full select -> plan -> realize -> evaluate pipeline");
  std::string run_config;
  std::uint64_t run_seed = 0;
  std::string run_corpus, run_train, run_validation, run_embeddings, run_out, run_checkpoint;
  bool run_do_train = false, run_no_sel = false, run_no_plan = false, run_random = false, run_oracle = false;
  std::optional<double> run_mix;
  std::optional<std::size_t> run_epochs;
  run->add_option("--config", run_config, "Pipeline config JSON")->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "Global random seed")->required();
  run->add_option("--corpus", run_corpus, "Corpus to summarize");
  run->add_option("--train-corpus", run_train, "Training corpus (with --train)");
  run->add_option("--validation-corpus", run_validation, "Validation corpus (with --train)");
  run->add_option("--embeddings", run_embeddings, "Word embedding text file");
  run->add_option("--checkpoint", run_checkpoint, "Selector checkpoint");
  run->add_option("--out-dir", run_out, "Output directory");
  run->add_option("--mix-ratio", run_mix, "Share of model inputs in the plan training set");
  run->add_option("--epochs", run_epochs, "Override selector epochs");
  run->add_flag("--train", run_do_train, "Train the selector before selecting");
  run->add_flag("--no-selection", run_no_sel, "Pass every document sentence to the planner");
  run->add_flag("--no-planning", run_no_plan, "Realize selections without plan ordering");
  run->add_flag("--random-selection", run_random, "Seeded random selection baseline");
  run->add_flag("--oracle-selection", run_oracle, "Use greedy oracle labels as the selection");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      synth_opts.seed = synth_seed;
      const fs::path dir(synth_out);
      fs::create_directories(dir);
      const auto data = make_synthetic_corpus(synth_opts);
      save_corpus(data.corpus, dir / "corpus.jsonl", true);
      save_embeddings(make_synthetic_embeddings(synth_opts.vocab_size, synth_dim, synth_seed), dir / "embeddings.txt");
      std::vector<json> rows;
      for (std::size_t i = 0; i < data.corpus.size(); ++i) rows.push_back({{"id", data.corpus[i].id}, {"salient", data.salient[i]}});
      write_jsonl(dir / "salient.jsonl", "synth", file_hash({std::to_string(synth_seed)}), rows);
    } else if (*prep) {
      const auto corpus = load_corpus(prep_corpus);
      const auto hash = file_hash({prep_corpus, std::to_string(prep_cap), std::to_string(prep_branching), std::to_string(prep_beam)});
      std::vector<json> labels, episodes;
      for (const auto& rec : corpus) {
        labels.push_back(to_json(greedy_oracle_labels(rec, prep_cap)));
        json eps = json::array();
        for (const auto& e : generate_episodes(rec, prep_branching, prep_beam, prep_cap)) eps.push_back(to_json(e));
        episodes.push_back({{"id", rec.id}, {"episodes", eps}});
      }
      write_jsonl(prep_labels, "prepare-oracle.labels", hash, labels);
      write_jsonl(prep_episodes, "prepare-oracle.episodes", hash, episodes);
    } else if (*train) {
      auto cfg = selector_config(train_config);
      cfg.seed = train_seed;
      if (train_epochs) cfg.epochs = *train_epochs;
      const auto corpus = load_corpus(train_corpus);
      std::map<std::string, std::vector<Episode>> episodes;
      for (const auto& row : read_jsonl(train_episodes)) {
        auto& list = episodes[row.at("id").get<std::string>()];
        for (const auto& e : row.at("episodes")) list.push_back(episode_from_json(e));
      }
      std::optional<Corpus> validation;
      TrainOptions opts;
      if (!train_validation.empty()) {
        validation = load_corpus(train_validation);
        opts.validation = &*validation;
      }
      opts.on_epoch = [](const EpochStats& s) {
        std::cerr << "epoch " << s.epoch << " mean_reward " << s.mean_reward << " validation_rougeL "
                  << s.validation_rouge_l << " skipped " << s.skipped_updates << '\n';
      };
      SelectorModel start = train_resume.empty() ? SelectorModel(cfg) : load_selector(train_resume);
      if (!train_resume.empty()) {
        if (start.config.seed != train_seed) throw Error("--seed differs from the checkpoint's seed");
        if (train_epochs) start.config.epochs = *train_epochs;
      }
      const auto embeddings = load_embeddings(train_embeddings, start.config.embed_dim);
      const auto model = continue_training(std::move(start), corpus, embeddings, episodes, opts);
      save_selector(model, train_out);
    } else if (*sel) {
      const auto corpus = load_corpus(sel_corpus);
      const auto model = load_selector(sel_checkpoint);
      const auto embeddings = load_embeddings(sel_embeddings, model.config.embed_dim);
      std::vector<json> rows;
      for (const auto& rec : corpus) rows.push_back(to_json(select(rec, model, embeddings)));
      write_jsonl(sel_out, "select", file_hash({sel_corpus, sel_checkpoint}), rows);
    } else if (*plan) {
      if (plan_gold == !plan_selections.empty()) throw Error("give exactly one of --selections or --gold");
      const auto corpus = load_corpus(plan_corpus);
      std::map<std::string, ExtractLabels> selections;
      if (!plan_gold) selections = read_selections(plan_selections);
      std::vector<json> rows;
      std::ofstream text_out;
      if (!plan_text_out.empty()) text_out.open(plan_text_out);
      for (const auto& rec : corpus) {
        std::vector<ParsedSentence> parses;
        if (plan_gold) {
          if (!rec.summary_parses) throw Error("record " + rec.id + " has no summary parses");
          parses = *rec.summary_parses;
        } else {
          const auto it = selections.find(rec.id);
          if (it == selections.end()) continue;
          parses = parses_for(rec, it->second.selected);
        }
        const auto p = generate_plan(parses, planner_opts);
        json row = {{"id", rec.id}, {"tuples", to_json(p)}, {"linearized", linearize_plan(p, plan_markers)}};
        if (plan_entities) row["entities"] = linearize_entity_plan(extract_entity_chain(parses));
        if (text_out) text_out << linearize_plan(p, plan_markers) << '\n';
        rows.push_back(std::move(row));
      }
      write_jsonl(plan_out, plan_gold ? "extract-plan.gold" : "extract-plan", file_hash({plan_corpus, plan_selections}), rows);
    } else if (*real) {
      realizer_cfg.drop_unplanned = !real_keep;
      const auto corpus = load_corpus(real_corpus);
      const auto selections = read_selections(real_selections);
      std::vector<json> rows;
      for (const auto& prow : read_jsonl(real_plans)) {
        const auto id = prow.at("id").get<std::string>();
        const auto& rec = record_or_throw(corpus, id);
        const auto it = selections.find(id);
        if (it == selections.end()) throw Error("no selection for record " + id);
        std::vector<std::string> selected;
        for (auto i : it->second.selected) selected.push_back(rec.doc_sentences.at(i));
        const auto out = realize(id, selected, plan_from_json(prow.at("tuples")), realizer_cfg);
        for (const auto& w : out.warnings) std::cerr << "warning: " << id << ": " << w << '\n';
        rows.push_back(to_json(out));
      }
      write_jsonl(real_out, "realize", file_hash({real_corpus, real_selections, real_plans}), rows);
    } else if (*eval) {
      rouge_cfg.casefold = !eval_no_casefold;
      const auto corpus = load_corpus(eval_corpus);
      std::map<std::string, std::string> refs, cands;
      for (const auto& rec : corpus) refs[rec.id] = rec.gold_summary;
      for (const auto& row : read_jsonl(eval_candidates)) cands[row.at("id").get<std::string>()] = row.at("summary").get<std::string>();
      const auto report = evaluate_corpus(cands, refs, rouge_cfg).to_json();
      if (eval_out.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        write_json_file(eval_out, report);
      }
    } else if (*run) {
      PipelineConfig cfg;
      if (!run_config.empty()) {
        std::ifstream in(run_config);
        cfg = PipelineConfig::from_json(json::parse(in), fs::path(run_config).parent_path());
      }
      cfg.seed = run_seed;
      if (!run_corpus.empty()) cfg.corpus = run_corpus;
      if (!run_train.empty()) cfg.train_corpus = run_train;
      if (!run_validation.empty()) cfg.validation_corpus = run_validation;
      if (!run_embeddings.empty()) cfg.embeddings = run_embeddings;
      if (!run_checkpoint.empty()) cfg.selector_checkpoint = run_checkpoint;
      if (!run_out.empty()) cfg.output_dir = run_out;
      if (run_mix) cfg.mix_ratio = *run_mix;
      if (run_epochs) cfg.selector.epochs = *run_epochs;
      if (run_do_train) cfg.train = true;
      if (run_no_plan) cfg.planning = false;
      if (run_no_sel + run_random + run_oracle > 1) throw Error("choose at most one selection override");
      if (run_no_sel) cfg.selection = SelectionMode::all;
      if (run_random) cfg.selection = SelectionMode::random;
      if (run_oracle) cfg.selection = SelectionMode::oracle;
      const auto report = run_pipeline(cfg);
      std::cout << json{{"rouge1", report.summary.mean.rouge1.f1},
                        {"rouge2", report.summary.mean.rouge2.f1},
                        {"rougeL", report.summary.mean.rougeL.f1},
                        {"report", (cfg.output_dir / "report.json").generic_string()}}
                       .dump()
                << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
