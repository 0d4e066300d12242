#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clozerank/ltr/dataset.hpp"
#include "clozerank/types.hpp"

namespace clozerank::ltr {

enum class Algorithm {
  ranksvm,
  ranknet,
  rankboost,
  adarank,
  coordinate_ascent,
  listnet,
  mart,
  lambdamart,
  random_forest,
};

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(const std::string& name);
/// All nine, in the fixed order used by reports.
const std::vector<Algorithm>& all_algorithms();

/// Threshold weak learner h(x) = [x_feature > threshold], scaled by weight.
struct Stump {
  int feature = 0;
  double threshold = 0.0;
  double weight = 0.0;
};

/// Single-feature weak ranker: weight * sign * x_feature.
struct FeatureRanker {
  int feature = 0;
  double sign = 1.0;
  double weight = 0.0;
};

/// Binary regression tree in array form; leaves carry values.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  bool empty() const { return nodes.empty(); }
  double eval(Eigen::Ref<const Vec> x) const;
  int leaf_count() const;
};

/// Trained scorer for any of the nine algorithms. Linear-family models
/// carry a per-feature standardization learned on the training data.
struct RankingModel {
  Algorithm algorithm = Algorithm::ranksvm;
  std::string schema_id;
  int dim = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> hyperparams;
  bool no_improvement_warning = false;  // adarank early stop after round 1

  // standardization (empty when unused)
  Vec feat_mean, feat_scale;

  // linear family
  Vec weights;

  // ranknet with a hidden layer
  bool has_hidden = false;
  Mat w1;
  Vec b1, w2;
  double b2 = 0.0;

  std::vector<Stump> stumps;            // rankboost
  std::vector<FeatureRanker> rankers;   // adarank

  std::vector<RegressionTree> trees;    // mart / lambdamart / random_forest
  double shrinkage = 1.0;
  bool average_trees = false;

  /// Scorer; throws Errc::schema_mismatch on a wrong-length vector.
  double score(Eigen::Ref<const Vec> v) const;
  Vec score_group(const RankedGroup& g) const;
};

/// Argmax with the canonical tie rule (lowest index wins).
int argmax_canonical(const Vec& scores);

/// Predicted row of the group; throws Errc::empty_group.
int predict(const RankingModel& model, const RankedGroup& group);

void save_model(const RankingModel& m, const std::string& path);
std::string format_model(const RankingModel& m);
RankingModel load_model(const std::string& path);
RankingModel parse_model(const std::string& text, const std::string& source_name);

}  // namespace clozerank::ltr
