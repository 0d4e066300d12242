#pragma once

#include <cstdint>
#include <string>

#include "clozerank/eval.hpp"
#include "clozerank/ltr/dataset.hpp"

namespace clozerank {

/// Feature-space synthetic ranking data. With label_feature on, feature 1
/// equals the relevance label (plus optional Gaussian noise); remaining
/// features are pure noise. separability scales the label feature.
struct SynthFeatureSpec {
  int groups = 100;
  int candidates = 10;
  int features = 5;
  double noise = 0.0;         // stddev added to the label feature
  double separability = 1.0;  // label feature scale
  bool label_feature = true;
  std::uint64_t seed = 42;
};

ltr::RankingDataset synth_features(const SynthFeatureSpec& spec);

/// Question-file corpus small enough for desk runs but learnable: each
/// query is a perturbed copy of the document sentence holding the answer,
/// so alignment/distance features separate the gold entity.
struct SynthCorpusSpec {
  int train_questions = 30;
  int valid_questions = 10;
  int test_questions = 10;
  int entities = 6;
  int sentences = 6;
  int embedding_dim = 8;
  std::uint64_t seed = 42;
};

/// Writes question files under <dir>/{training,validation,test}/, matching
/// annotation sidecars under <dir>/annotations/<split>/ and an embedding
/// table at <dir>/embeddings.txt.
void write_synth_corpus(const SynthCorpusSpec& spec, const std::string& dir);

/// In-memory variant used by the harness tests.
Corpus make_synth_corpus(const SynthCorpusSpec& spec);

}  // namespace clozerank
