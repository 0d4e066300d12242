#include "clozerank/eval.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "clozerank/error.hpp"
#include "clozerank/text_util.hpp"

namespace clozerank {

using ltr::Algorithm;
using ltr::RankingDataset;
using ltr::RankingModel;

EvalReport evaluate(const RankingModel& model, const RankingDataset& data,
                    const std::string& split) {
  EvalReport rep;
  rep.split = split;
  for (const auto& g : data.groups) {
    const int gold = g.gold();
    const int pred = ltr::predict(model, g);
    QuestionResult r;
    r.qid = g.qid;
    r.predicted = g.id_of(pred);
    r.gold = gold >= 0 ? g.id_of(gold) : "?";
    r.correct = pred == gold;
    rep.total += 1;
    rep.correct += r.correct;
    rep.records.push_back(std::move(r));
  }
  return rep;
}

std::string StudyTable::to_text() const {
  std::vector<std::size_t> width(columns.size());
  for (size_t c = 0; c < columns.size(); ++c) width[c] = columns[c].size();
  for (const auto& row : rows)
    for (size_t c = 0; c < row.size() && c < width.size(); ++c)
      width[c] = std::max(width[c], row[c].size());

  std::ostringstream out;
  out << title << "\n";
  auto emit = [&](const std::vector<std::string>& cells) {
    for (size_t c = 0; c < width.size(); ++c) {
      const std::string& cell = c < cells.size() ? cells[c] : "";
      out << cell << std::string(width[c] - cell.size(), ' ');
      out << (c + 1 < width.size() ? "  " : "");
    }
    out << "\n";
  };
  emit(columns);
  std::vector<std::string> rule;
  for (size_t c = 0; c < width.size(); ++c) rule.push_back(std::string(width[c], '-'));
  emit(rule);
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::string StudyTable::to_tsv() const {
  std::ostringstream out;
  out << join(columns, "\t") << "\n";
  for (const auto& row : rows) out << join(row, "\t") << "\n";
  return out.str();
}

RankingDataset featurize_split(const LoadedSplit& split,
                               const FeatureConfig& config,
                               const EmbeddingTable* emb, bool coref,
                               int threads) {
  const bool with_anno = !split.annotations.empty();
  if (config.needs_annotations(coref) && !with_anno)
    raise(Errc::config_error,
          "feature set " + config.schema_id() + " requires annotations");

  std::vector<FeatureMatrix> mats(split.questions.size());
  const int n = (int)split.questions.size();
  const int workers = std::max(1, std::min(threads, n));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors((size_t)workers);

  auto run = [&](int wid) {
    try {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        const AnnotationSet* anno =
            with_anno ? &split.annotations[(size_t)i] : nullptr;
        mats[(size_t)i] = featurize(split.questions[(size_t)i], anno, config,
                                    emb, coref);
        mats[(size_t)i].qid = std::to_string(i + 1);  // 1-based ordinal
      }
    } catch (...) {
      errors[(size_t)wid] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RankingDataset ds;
  ds.schema_id = config.schema_id();
  for (auto& m : mats) {
    ltr::RankedGroup g;
    g.qid = m.qid;
    g.features = std::move(m.values);
    g.labels = std::move(m.labels);
    g.ids = std::move(m.candidates);
    ds.groups.push_back(std::move(g));
  }
  return ds;
}

namespace {

std::string pct(double accuracy) { return format_g6(100.0 * accuracy); }

struct SplitSets {
  RankingDataset train, valid, test;
};

SplitSets featurize_corpus(const Corpus& corpus, const FeatureConfig& config,
                           bool coref, int threads) {
  const EmbeddingTable* emb =
      corpus.embeddings ? &*corpus.embeddings : nullptr;
  return {featurize_split(corpus.train, config, emb, coref, threads),
          featurize_split(corpus.valid, config, emb, coref, threads),
          featurize_split(corpus.test, config, emb, coref, threads)};
}

std::vector<std::string> accuracy_row(const std::string& name,
                                      const RankingModel& model,
                                      const SplitSets& sets) {
  return {name, pct(evaluate(model, sets.train, "train").accuracy()),
          pct(evaluate(model, sets.valid, "valid").accuracy()),
          pct(evaluate(model, sets.test, "test").accuracy())};
}

}  // namespace

StudyTable single_feature_study(const Corpus& corpus,
                                const std::vector<FeatureKind>& kinds,
                                const FeatureConfig& base, Algorithm algorithm,
                                const std::map<std::string, double>& params,
                                std::uint64_t seed, int threads) {
  StudyTable table;
  table.title = "Single-feature performance (" +
                std::string(ltr::algorithm_name(algorithm)) + ", accuracy %)";
  table.columns = {"Feature", "Train", "Valid", "Test"};
  for (FeatureKind k : kinds) {
    FeatureConfig config = base;
    config.set_enabled({k});
    const SplitSets sets = featurize_corpus(corpus, config, false, threads);
    const RankingModel model =
        ltr::train_model(sets.train, algorithm, params, seed);
    table.rows.push_back(accuracy_row(feature_name(k), model, sets));
  }
  return table;
}

StudyTable ablation_study(const Corpus& corpus, const FeatureConfig& base,
                          Algorithm algorithm,
                          const std::map<std::string, double>& params,
                          std::uint64_t seed, int threads) {
  StudyTable table;
  table.title = "Component analysis (" +
                std::string(ltr::algorithm_name(algorithm)) + ", accuracy %)";
  table.columns = {"Model", "Train", "Valid", "Test"};

  struct Row {
    std::string name;
    FeatureConfig config;
    bool coref;
  };
  auto without = [&](FeatureKind k) {
    FeatureConfig c = base;
    std::vector<FeatureKind> kinds;
    for (FeatureKind e : c.enabled)
      if (e != k) kinds.push_back(e);
    c.set_enabled(kinds);
    return c;
  };
  const std::vector<Row> rows = {
      {"L2R Reader", base, false},
      {"L2R+Coref", base, true},
      {"L2R-WMD", without(FeatureKind::Wmd), false},
      {"L2R-FS", without(FeatureKind::FS), false},
  };
  for (const auto& row : rows) {
    const SplitSets sets = featurize_corpus(corpus, row.config, row.coref, threads);
    const RankingModel model =
        ltr::train_model(sets.train, algorithm, params, seed);
    table.rows.push_back(accuracy_row(row.name, model, sets));
  }
  return table;
}

StudyTable learning_curve(const RankingDataset& train,
                          const RankingDataset& valid,
                          const RankingDataset& test,
                          const std::vector<int>& sizes, int repeats,
                          Algorithm algorithm,
                          const std::map<std::string, double>& params,
                          std::uint64_t seed) {
  StudyTable table;
  table.title = "Accuracy (%) vs training size (" +
                std::string(ltr::algorithm_name(algorithm)) + ", mean over " +
                std::to_string(repeats) + " samples)";
  table.columns = {"Training", "Valid", "Test"};

  const int total = (int)train.groups.size();
  for (int size : sizes)
    if (size < 1 || size > total)
      raise(Errc::size_exceeds_corpus,
            "size " + std::to_string(size) + " exceeds the " +
                std::to_string(total) + " available training questions");

  for (size_t si = 0; si < sizes.size(); ++si) {
    double val_sum = 0.0, test_sum = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
      std::mt19937_64 rng(seed + 1315423911ULL * (std::uint64_t)(si * 10007 + rep));
      std::vector<int> idx(train.groups.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      RankingDataset sample;
      sample.schema_id = train.schema_id;
      for (int k = 0; k < sizes[si]; ++k)
        sample.groups.push_back(train.groups[(size_t)idx[(size_t)k]]);
      const RankingModel model = ltr::train_model(
          sample, algorithm, params, seed + (std::uint64_t)rep);
      val_sum += evaluate(model, valid, "valid").accuracy();
      test_sum += evaluate(model, test, "test").accuracy();
    }
    table.rows.push_back({std::to_string(sizes[si]),
                          pct(val_sum / repeats), pct(test_sum / repeats)});
  }
  return table;
}

const std::vector<std::map<std::string, double>>& tuning_grid(Algorithm a) {
  using Params = std::map<std::string, double>;
  using Grid = std::vector<Params>;
  static const std::map<Algorithm, Grid> grids = [] {
    std::map<Algorithm, Grid> g;
    g[Algorithm::ranksvm] = {Params{{"lambda", 1e-4}}, Params{{"lambda", 1e-3}}};
    g[Algorithm::ranknet] = {Params{{"eta", 0.005}}, Params{{"eta", 0.05}}};
    g[Algorithm::rankboost] = {Params{{"rounds", 100}}, Params{{"rounds", 300}}};
    g[Algorithm::adarank] = {Params{{"rounds", 100}}, Params{{"rounds", 500}}};
    g[Algorithm::coordinate_ascent] = {Params{{"restarts", 3}},
                                       Params{{"restarts", 5}}};
    g[Algorithm::listnet] = {Params{{"eta", 0.01}}, Params{{"eta", 0.1}}};
    g[Algorithm::mart] = {Params{{"trees", 200}}, Params{{"trees", 500}}};
    g[Algorithm::lambdamart] = {Params{{"trees", 200}}, Params{{"trees", 500}}};
    g[Algorithm::random_forest] = {
        Params{{"trees", 100}},
        Params{{"trees", 300}, {"feature_fraction", 0.6}}};
    return g;
  }();
  return grids.at(a);
}

StudyTable algorithm_comparison(const RankingDataset& train,
                                const RankingDataset& valid,
                                const RankingDataset& test,
                                const std::vector<Algorithm>& algorithms,
                                std::uint64_t seed) {
  StudyTable table;
  table.title = "Ranking algorithm comparison (accuracy %)";
  table.columns = {"Algorithm", "Valid", "Test"};
  for (Algorithm a : algorithms) {
    double best_val = -1.0;
    RankingModel best_model;
    for (const auto& params : tuning_grid(a)) {
      const RankingModel model = ltr::train_model(train, a, params, seed);
      const double val = evaluate(model, valid, "valid").accuracy();
      if (val > best_val) {
        best_val = val;
        best_model = model;
      }
    }
    table.rows.push_back({ltr::algorithm_name(a), pct(best_val),
                          pct(evaluate(best_model, test, "test").accuracy())});
  }
  return table;
}

}  // namespace clozerank
