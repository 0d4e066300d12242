#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "clozerank/ltr/dataset.hpp"
#include "clozerank/ltr/model.hpp"

namespace clozerank::ltr {

// Hyperparameter defaults. The paper reports none, so these are the
// project-wide tuning baseline; everything is overridable per run.
struct LinearPairwiseParams {
  double eta = 0.01;        // ranksvm default; ranknet uses 0.005
  double lambda = 1e-4;     // ranksvm regularization
  int epochs = 100;
  int hidden = 0;           // ranknet hidden width, 0 = linear
  bool batch = false;       // ranksvm: full-batch subgradient steps
};

struct CoordinateAscentParams {
  int restarts = 5;
  double tolerance = 1e-4;
  int max_cycles = 50;
};

struct GbdtParams {
  int trees = 1000;
  double shrinkage = 0.1;
  int max_leaves = 10;
  int min_samples_leaf = 1;
};

struct ForestParams {
  int trees = 300;
  double feature_fraction = 0.3;
  double sample_fraction = 0.7;
  int max_leaves = 10;
  int min_samples_leaf = 1;
};

RankingModel fit_linear_pairwise(const RankingDataset& data, Algorithm algorithm,
                                 const LinearPairwiseParams& params,
                                 std::uint64_t seed);

struct RankBoostTrace {
  std::vector<double> round_r;         // r_t per round
  std::vector<double> dist_total;      // pair-weight mass after each round
};
RankingModel fit_rankboost(const RankingDataset& data, int rounds,
                           std::uint64_t seed, double alpha_cap = 10.0,
                           RankBoostTrace* trace = nullptr);

RankingModel fit_adarank(const RankingDataset& data, int rounds,
                         double alpha_cap = 10.0);

RankingModel fit_coordinate_ascent(const RankingDataset& data,
                                   const CoordinateAscentParams& params,
                                   std::uint64_t seed);

RankingModel fit_listnet(const RankingDataset& data, double eta, int epochs,
                         std::uint64_t seed);

RankingModel fit_gbdt(const RankingDataset& data, Algorithm algorithm,
                      const GbdtParams& params, std::uint64_t seed);

RankingModel fit_random_forest(const RankingDataset& data,
                               const ForestParams& params, std::uint64_t seed);

/// Dispatcher over string hyperparameters (CLI & tuning entry point).
/// Unknown keys are rejected. Keys: eta, lambda, epochs, hidden, batch,
/// rounds, alpha_cap, restarts, tolerance, max_cycles, trees, shrinkage,
/// max_leaves, min_samples_leaf, feature_fraction, sample_fraction.
RankingModel train_model(const RankingDataset& data, Algorithm algorithm,
                         const std::map<std::string, double>& params,
                         std::uint64_t seed);

/// Fraction of groups whose argmax row is the gold row.
double training_accuracy(const RankingModel& model, const RankingDataset& data);

// --- loss/gradient surfaces exposed for the finite-difference checks -------

/// RankNet pairwise logistic loss and its gradient over the flattened
/// parameter vector of `scorer` (see pack/unpack in the implementation).
struct RankNetScorer {
  bool hidden = false;
  Vec w;        // linear scorer
  Mat w1;       // hidden x dim
  Vec b1, w2;   // hidden
  double b2 = 0.0;

  static RankNetScorer linear(int dim);
  static RankNetScorer with_hidden(int dim, int width, std::uint64_t seed);
  double score(Eigen::Ref<const Vec> x) const;
  int param_count() const;
  Vec pack() const;
  void unpack(const Vec& theta);
};

double ranknet_loss(const RankingDataset& data, const RankNetScorer& scorer);
Vec ranknet_gradient(const RankingDataset& data, const RankNetScorer& scorer);

double listnet_loss(const RankingDataset& data, const Vec& w);
Vec listnet_gradient(const RankingDataset& data, const Vec& w);

/// RankSVM objective: lambda*||w||^2/2 + sum of pair hinges.
double ranksvm_objective(const RankingDataset& data, const Vec& w, double lambda);

/// Per-feature z-score transform fitted on the training rows (constant
/// features get scale 1).
void fit_standardization(const RankingDataset& data, Vec* mean, Vec* scale);
RankingDataset standardize(const RankingDataset& data, const Vec& mean,
                           const Vec& scale);

}  // namespace clozerank::ltr
