#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "plansum/error.hpp"
#include "plansum/oracle.hpp"
#include "plansum/pipeline.hpp"
#include "plansum/selector.hpp"
#include "plansum/synthetic.hpp"

using namespace plansum;
using nn::Mat;
using nn::Tape;

namespace {

SelectorConfig tiny_config() {
  SelectorConfig cfg;
  cfg.embed_dim = 8;
  cfg.heads = 2;
  cfg.ff_dim = 16;
  cfg.local_layers = 1;
  cfg.global_layers = 1;
  cfg.history_layers = 1;
  cfg.max_extract = 6;
  cfg.epochs = 2;
  cfg.lr = 1e-3;
  cfg.seed = 5;
  return cfg;
}

struct Fixture {
  SyntheticCorpus data;
  EmbeddingTable embeddings;
  std::map<std::string, std::vector<Episode>> episodes;

  Fixture() : data(make()), embeddings(make_synthetic_embeddings(40, 8, 3)) {
    episodes = prepare_episodes(data.corpus, 2, 2, 6);
  }
  static SyntheticCorpus make() {
    SyntheticOptions o;
    o.n_docs = 6;
    o.sentences_per_doc = 8;
    o.salient_per_doc = 2;
    o.vocab_size = 40;
    o.seed = 1;
    return make_synthetic_corpus(o);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void set_stop_bias(SelectorModel& model, float value) {
  auto* p = model.net.params().find("stop.out.bias");
  REQUIRE(p != nullptr);
  p->value.setConstant(value);
  // the hidden path is zeroed so the bias alone decides p_stop
  model.net.params().find("stop.out.weight")->value.setZero();
}

bool same_parameters(const SelectorModel& a, const SelectorModel& b) {
  const auto& pa = a.net.params();
  const auto& pb = b.net.params();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].value.size() != pb[i].value.size()) return false;
    if (std::memcmp(pa[i].value.data(), pb[i].value.data(), sizeof(float) * pa[i].value.size()) != 0) return false;
    if (std::memcmp(a.adam.m[i].data(), b.adam.m[i].data(), sizeof(float) * a.adam.m[i].size()) != 0) return false;
    if (std::memcmp(a.adam.v[i].data(), b.adam.v[i].data(), sizeof(float) * a.adam.v[i].size()) != 0) return false;
  }
  return a.step == b.step && a.adam.step == b.adam.step;
}

}  // namespace

TEST_CASE("config validation") {
  auto cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.stop_threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = tiny_config();
  cfg.heads = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = tiny_config();
  cfg.max_extract = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(SelectorConfig::from_json(tiny_config().to_json()) == tiny_config());
  const SelectorConfig defaults;
  CHECK(defaults.embed_dim == 200);
  CHECK(defaults.heads == 8);
  CHECK(defaults.ff_dim == 1024);
  CHECK(defaults.history_layers == 3);
  CHECK(defaults.stop_threshold == 0.6);
  CHECK(defaults.max_extract == 45);
  CHECK(defaults.lr == 1e-4);
}

TEST_CASE("local and global encoders") {
  const SelectorNet<double> net(tiny_config(), 1);
  Rng rng(2);
  auto random = [&](Eigen::Index rows) {
    Mat<double> m(rows, 8);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
  };
  const auto a = random(4);
  std::vector<Mat<double>> doc = {a, random(1), a, random(6), random(2)};
  Tape<double> t;
  const auto local = net.encode_local(t, doc);
  CHECK(local.rows() == 5);
  CHECK(local.cols() == 8);
  CHECK(local.value().allFinite());
  CHECK((local.value().row(0) - local.value().row(2)).cwiseAbs().maxCoeff() == 0.0);

  // batching with padding does not change a sentence's encoding
  const auto alone = net.encode_local(t, {doc[1]});
  CHECK((alone.value().row(0) - local.value().row(1)).cwiseAbs().maxCoeff() < 1e-12);

  const auto global = net.encode_global(t, local);
  CHECK(global.rows() == 5);
  std::vector<Mat<double>> reversed(doc.rbegin(), doc.rend());
  const auto global_rev = net.encode_global(t, net.encode_local(t, reversed));
  CHECK((global_rev.value().row(4) - global.value().row(0)).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("history encoder is permutation-equivariant") {
  const SelectorNet<double> net(tiny_config(), 1);
  Rng rng(3);
  Mat<double> vecs(6, 8);
  for (Eigen::Index i = 0; i < vecs.size(); ++i) vecs.data()[i] = rng.normal();
  Tape<double> t;
  const auto local = t.constant(vecs);
  const auto a = net.encode_history(t, local, {4}, {0, 2, 3, 5});
  const auto b = net.encode_history(t, local, {4}, {5, 3, 0, 2});
  const std::vector<int> map_b_to_a = {3, 2, 0, 1};
  for (int r = 0; r < 4; ++r) {
    CHECK((b.value().row(r) - a.value().row(map_b_to_a[r])).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(net.encode_history(t, local, {0, 1, 2, 3, 4, 5}, {}), Error);
}

TEST_CASE("policy step distribution") {
  const SelectorNet<double> net(tiny_config(), 4);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Mat<double> vecs(5, 8);
    for (Eigen::Index i = 0; i < vecs.size(); ++i) vecs.data()[i] = rng.normal();
    Tape<double> t;
    const auto local = t.constant(vecs);
    const auto out = net.policy_step(t, {local, net.encode_global(t, local), {1, 3}, {0, 2, 4}});
    CHECK(std::abs(out.log_probs.value().array().exp().sum() - 1.0) < 1e-9);
    CHECK(out.p_stop() > 0.0);
    CHECK(out.p_stop() < 1.0);
  }
  // identical remaining sentences share probability equally
  Mat<double> same(3, 8);
  for (int r = 0; r < 3; ++r) same.row(r).setConstant(0.3);
  Tape<double> t;
  const auto local = t.constant(same);
  const auto out = net.policy_step(t, {local, local, {0}, {1, 2}});
  CHECK(std::exp(out.log_probs.value()(0, 0)) == doctest::Approx(0.5).epsilon(1e-12));

  PolicyState<double> bad{local, local, {0, 1}, {1, 2}};
  CHECK_THROWS_AS(bad.check_partition(), Error);
}

TEST_CASE("episodes respect max_extract, determinism and the stop threshold") {
  const auto& f = fixture();
  const auto& rec = f.data.corpus[0];
  auto cfg = tiny_config();
  cfg.max_extract = 1;
  SelectorModel capped(cfg);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    CHECK(run_episode(rec, capped, f.embeddings, EpisodeMode::sample, &rng).episode.extraction_order.size() <= 1);
  }

  SelectorModel model(tiny_config());
  const auto g1 = run_episode(rec, model, f.embeddings, EpisodeMode::greedy);
  const auto g2 = run_episode(rec, model, f.embeddings, EpisodeMode::greedy);
  CHECK(g1.episode.extraction_order == g2.episode.extraction_order);
  CHECK(g1.episode.reward == g2.episode.reward);
  // greedy stops at the first step whose p_stop reaches the threshold
  const auto& ps = g1.stop_probabilities;
  REQUIRE(!ps.empty());
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) CHECK(ps[i] < model.config.stop_threshold);
  const bool stopped = ps.back() >= model.config.stop_threshold;
  CHECK((stopped || g1.episode.extraction_order.size() == model.config.max_extract ||
         g1.episode.extraction_order.size() == rec.doc_sentences.size()));

  set_stop_bias(model, 10.0f);
  CHECK(select(rec, model, f.embeddings).selected.empty());
  set_stop_bias(model, -10.0f);
  const auto all = select(rec, model, f.embeddings);
  CHECK(all.selected.size() == std::min(model.config.max_extract, rec.doc_sentences.size()));
  CHECK(std::is_sorted(all.selected.begin(), all.selected.end()));
  CHECK(std::adjacent_find(all.selected.begin(), all.selected.end()) == all.selected.end());

  CHECK_THROWS_AS(run_episode(rec, model, f.embeddings, EpisodeMode::sample, nullptr), Error);
}

TEST_CASE("single-sentence document is selected iff p_stop is below the threshold") {
  const auto& f = fixture();
  CaseRecord rec = f.data.corpus[0];
  rec.doc_sentences.resize(1);
  rec.doc_parses.reset();
  for (float bias : {-3.0f, -0.5f, 0.5f, 3.0f}) {
    SelectorModel model(tiny_config());
    set_stop_bias(model, bias);
    const auto r = run_episode(rec, model, f.embeddings, EpisodeMode::greedy);
    const bool below = r.stop_probabilities.front() < model.config.stop_threshold;
    CHECK(select(rec, model, f.embeddings).selected.size() == (below ? 1u : 0u));
  }
}

TEST_CASE("zero advantage leaves parameters unchanged") {
  const auto& f = fixture();
  Corpus corpus = {f.data.corpus[0]};
  corpus[0].gold_summary = "zzz qqq";  // no overlap: every reward is zero
  std::map<std::string, std::vector<Episode>> episodes;
  episodes[corpus[0].id] = {Episode{corpus[0].id, {0, 1}, 0.0}, Episode{corpus[0].id, {2}, 0.0}};
  SelectorModel model(tiny_config());
  const auto before = model.clone();
  SelectorTrainer trainer(corpus, f.embeddings, episodes, model);
  trainer.update();
  CHECK(trainer.last_update_skipped());
  CHECK(model.step == 1);
  const auto& pa = model.net.params();
  const auto& pb = before.net.params();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].value == pb[i].value);
  CHECK(model.adam.step == before.adam.step);
}

TEST_CASE("non-finite loss names the step and the record") {
  const auto& f = fixture();
  SelectorModel model(tiny_config());
  model.net.params().find("score.out.bias")->value.setConstant(NAN);
  SelectorTrainer trainer(f.data.corpus, f.embeddings, f.episodes, model);
  try {
    trainer.update();
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("step 0") != std::string::npos);
    CHECK(msg.find("synth-") != std::string::npos);
  }
}

TEST_CASE("checkpoint round-trip and resume determinism") {
  const auto& f = fixture();
  const auto dir = std::filesystem::temp_directory_path() / "plansum_test_selector";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  auto cfg = tiny_config();
  cfg.epochs = 20;  // 6 docs x 20 epochs = 120 updates available
  SelectorModel a(cfg);
  SelectorTrainer ta(f.data.corpus, f.embeddings, f.episodes, a);
  for (int i = 0; i < 100; ++i) ta.update();
  save_selector(a, dir / "step100.ckpt");

  auto restored = load_selector(dir / "step100.ckpt");
  CHECK(same_parameters(a, restored));
  CHECK(restored.config == a.config);

  ta.update();  // uninterrupted step 101
  SelectorTrainer tb(f.data.corpus, f.embeddings, f.episodes, restored);
  tb.update();
  CHECK(restored.step == 101);
  CHECK(same_parameters(a, restored));
}

TEST_CASE("training is reproducible") {
  const auto& f = fixture();
  auto cfg = tiny_config();
  cfg.epochs = 3;
  std::vector<EpochStats> stats;
  TrainOptions opts;
  opts.on_epoch = [&](const EpochStats& s) { stats.push_back(s); };
  const auto m1 = train_reinforce(f.data.corpus, f.embeddings, f.episodes, cfg, opts);
  const auto m2 = train_reinforce(f.data.corpus, f.embeddings, f.episodes, cfg);
  CHECK(same_parameters(m1, m2));
  CHECK(stats.size() == 3);
  CHECK(m1.step == 3 * f.data.corpus.size());
  for (const auto& s : stats) {
    CHECK(s.mean_reward >= 0.0);
    CHECK(s.mean_reward <= 1.0);
  }

  const auto dir = std::filesystem::temp_directory_path() / "plansum_test_selector_bits";
  std::filesystem::create_directories(dir);
  save_selector(m1, dir / "a.ckpt");
  save_selector(m2, dir / "b.ckpt");
  CHECK(std::filesystem::file_size(dir / "a.ckpt") == std::filesystem::file_size(dir / "b.ckpt"));

  TrainOptions with_validation;
  with_validation.validation = &f.data.corpus;
  const auto best = train_reinforce(f.data.corpus, f.embeddings, f.episodes, cfg, with_validation);
  CHECK(validation_rouge_l(f.data.corpus, best, f.embeddings) >= 0.0);
}

TEST_CASE("reinforce loss has zero gradient when rewards are equal") {
  const auto& f = fixture();
  SelectorModel model(tiny_config());
  const auto sentences = embed_sentences(f.data.corpus[0].doc_sentences, f.embeddings);
  model.net.params().zero_grad();
  Tape<float> tape;
  const std::vector<Episode> eps = {{"x", {0, 2}, 0.4}, {"x", {1}, 0.4}, {"x", {3, 4, 5}, 0.4}};
  const auto loss = SelectorTrainer::reinforce_loss(tape, model.net, sentences, eps, model.config, {});
  tape.backward(loss);
  for (std::size_t i = 0; i < model.net.params().size(); ++i) {
    CHECK(model.net.params()[i].grad.cwiseAbs().maxCoeff() == 0.0f);
  }
}
