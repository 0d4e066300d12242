#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clozerank/corpus.hpp"
#include "clozerank/features.hpp"
#include "clozerank/ltr/model.hpp"
#include "clozerank/ltr/trainers.hpp"

namespace clozerank {

struct QuestionResult {
  std::string qid;
  std::string predicted;
  std::string gold;
  bool correct = false;
};

struct EvalReport {
  std::string split;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::vector<QuestionResult> records;
  double accuracy() const { return total ? (double)correct / (double)total : 0.0; }
};

/// Score every group and compare argmax against gold (pure reporting).
EvalReport evaluate(const ltr::RankingModel& model,
                    const ltr::RankingDataset& data, const std::string& split);

/// Plain-text + delimited study tables with the layouts of the paper-style
/// reports (one row per algorithm / feature / size / configuration).
struct StudyTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_text() const;
  std::string to_tsv() const;
};

/// Questions plus (optional) parallel annotations for one split.
struct LoadedSplit {
  std::vector<QuestionInstance> questions;
  std::vector<AnnotationSet> annotations;  // empty or |questions| entries
};

/// Fully loaded three-split corpus with shared embeddings.
struct Corpus {
  LoadedSplit train, valid, test;
  std::optional<EmbeddingTable> embeddings;
};

/// Featurize a split into the ranking dataset (qids are 1-based ordinals).
ltr::RankingDataset featurize_split(const LoadedSplit& split,
                                    const FeatureConfig& config,
                                    const EmbeddingTable* emb, bool coref,
                                    int threads);

/// One model per singleton feature config, evaluated on all three splits.
StudyTable single_feature_study(const Corpus& corpus,
                                const std::vector<FeatureKind>& kinds,
                                const FeatureConfig& base,
                                ltr::Algorithm algorithm,
                                const std::map<std::string, double>& params,
                                std::uint64_t seed, int threads);

/// Rows: the default reader, +Coref, -WMD and -FS configurations.
StudyTable ablation_study(const Corpus& corpus, const FeatureConfig& base,
                          ltr::Algorithm algorithm,
                          const std::map<std::string, double>& params,
                          std::uint64_t seed, int threads);

/// Per-size means of validation/test accuracy over `repeats` resamples of
/// the training groups. Throws Errc::size_exceeds_corpus.
StudyTable learning_curve(const ltr::RankingDataset& train,
                          const ltr::RankingDataset& valid,
                          const ltr::RankingDataset& test,
                          const std::vector<int>& sizes, int repeats,
                          ltr::Algorithm algorithm,
                          const std::map<std::string, double>& params,
                          std::uint64_t seed);

/// Small fixed per-algorithm grid, selected on validation accuracy.
const std::vector<std::map<std::string, double>>& tuning_grid(ltr::Algorithm a);

StudyTable algorithm_comparison(const ltr::RankingDataset& train,
                                const ltr::RankingDataset& valid,
                                const ltr::RankingDataset& test,
                                const std::vector<ltr::Algorithm>& algorithms,
                                std::uint64_t seed);

}  // namespace clozerank
