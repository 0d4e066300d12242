#include "clozerank/ltr/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "clozerank/error.hpp"
#include "clozerank/ltr/tree_builder.hpp"

namespace clozerank::ltr {

namespace {

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) without overflow
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// (group, gold row, non-gold row): the only pairs generated, since
// relevance is binary with a single positive per group.
struct Pair {
  int group;
  int pos;
  int neg;
};

std::vector<Pair> make_pairs(const RankingDataset& data) {
  std::vector<Pair> pairs;
  for (int g = 0; g < (int)data.groups.size(); ++g) {
    const int gold = data.groups[(size_t)g].gold();
    for (int j = 0; j < data.groups[(size_t)g].rows(); ++j)
      if (j != gold) pairs.push_back({g, gold, j});
  }
  return pairs;
}

int group_argmax(const Vec& scores) { return argmax_canonical(scores); }

RankingModel base_model(Algorithm a, const RankingDataset& data,
                        std::uint64_t seed) {
  RankingModel m;
  m.algorithm = a;
  m.schema_id = data.schema_id;
  m.dim = data.dim();
  m.seed = seed;
  return m;
}

}  // namespace

void fit_standardization(const RankingDataset& data, Vec* mean, Vec* scale) {
  const int d = data.dim();
  Vec sum = Vec::Zero(d), sumsq = Vec::Zero(d);
  double n = 0;
  for (const auto& g : data.groups) {
    sum += g.features.colwise().sum().transpose();
    sumsq += g.features.array().square().colwise().sum().matrix().transpose();
    n += g.rows();
  }
  *mean = sum / n;
  Vec var = (sumsq / n - mean->cwiseProduct(*mean)).cwiseMax(0.0);
  *scale = var.cwiseSqrt();
  for (long i = 0; i < scale->size(); ++i)
    if ((*scale)(i) < 1e-12) (*scale)(i) = 1.0;
}

RankingDataset standardize(const RankingDataset& data, const Vec& mean,
                           const Vec& scale) {
  RankingDataset out = data;
  for (auto& g : out.groups)
    g.features = (g.features.rowwise() - mean.transpose()).array().rowwise() /
                 scale.transpose().array();
  return out;
}

double training_accuracy(const RankingModel& model, const RankingDataset& data) {
  if (data.groups.empty()) return 0.0;
  int correct = 0;
  for (const auto& g : data.groups)
    correct += predict(model, g) == g.gold();
  return (double)correct / (double)data.groups.size();
}

// --- ranksvm / ranknet -------------------------------------------------------

double ranksvm_objective(const RankingDataset& data, const Vec& w, double lambda) {
  double obj = 0.5 * lambda * w.squaredNorm();
  for (const auto& g : data.groups) {
    const int gold = g.gold();
    const Vec scores = g.features * w;
    for (int j = 0; j < g.rows(); ++j) {
      if (j == gold) continue;
      obj += std::max(0.0, 1.0 - (scores(gold) - scores(j)));
    }
  }
  return obj;
}

RankNetScorer RankNetScorer::linear(int dim) {
  RankNetScorer s;
  s.hidden = false;
  s.w = Vec::Zero(dim);
  return s;
}

RankNetScorer RankNetScorer::with_hidden(int dim, int width, std::uint64_t seed) {
  RankNetScorer s;
  s.hidden = true;
  std::mt19937_64 rng(mix_seed(seed, 17));
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  s.w1.resize(width, dim);
  for (long i = 0; i < s.w1.rows(); ++i)
    for (long j = 0; j < s.w1.cols(); ++j)
      s.w1(i, j) = u(rng) / std::sqrt((double)dim);
  s.b1 = Vec::Zero(width);
  s.w2.resize(width);
  for (long i = 0; i < width; ++i) s.w2(i) = u(rng) / std::sqrt((double)width);
  s.b2 = 0.0;
  return s;
}

double RankNetScorer::score(Eigen::Ref<const Vec> x) const {
  if (!hidden) return w.dot(x);
  const Vec h = (w1 * x + b1).unaryExpr([](double z) { return logistic(z); });
  return w2.dot(h) + b2;
}

int RankNetScorer::param_count() const {
  if (!hidden) return (int)w.size();
  return (int)(w1.size() + b1.size() + w2.size() + 1);
}

Vec RankNetScorer::pack() const {
  if (!hidden) return w;
  Vec theta(param_count());
  long k = 0;
  for (long i = 0; i < w1.rows(); ++i)
    for (long j = 0; j < w1.cols(); ++j) theta(k++) = w1(i, j);
  for (long i = 0; i < b1.size(); ++i) theta(k++) = b1(i);
  for (long i = 0; i < w2.size(); ++i) theta(k++) = w2(i);
  theta(k) = b2;
  return theta;
}

void RankNetScorer::unpack(const Vec& theta) {
  if (!hidden) {
    w = theta;
    return;
  }
  long k = 0;
  for (long i = 0; i < w1.rows(); ++i)
    for (long j = 0; j < w1.cols(); ++j) w1(i, j) = theta(k++);
  for (long i = 0; i < b1.size(); ++i) b1(i) = theta(k++);
  for (long i = 0; i < w2.size(); ++i) w2(i) = theta(k++);
  b2 = theta(k);
}

double ranknet_loss(const RankingDataset& data, const RankNetScorer& scorer) {
  double loss = 0.0;
  for (const auto& g : data.groups) {
    const int gold = g.gold();
    Vec scores(g.rows());
    for (int i = 0; i < g.rows(); ++i)
      scores(i) = scorer.score(g.features.row(i).transpose());
    for (int j = 0; j < g.rows(); ++j) {
      if (j == gold) continue;
      loss += softplus(-(scores(gold) - scores(j)));
    }
  }
  return loss;
}

namespace {

// d(score)/d(theta) for one row, packed like RankNetScorer::pack().
Vec score_gradient(const RankNetScorer& s, Eigen::Ref<const Vec> x) {
  if (!s.hidden) return x;
  Vec theta_grad(s.param_count());
  const Vec pre = s.w1 * x + s.b1;
  const Vec h = pre.unaryExpr([](double z) { return logistic(z); });
  const Vec dh = s.w2.cwiseProduct(h.cwiseProduct(Vec::Ones(h.size()) - h));
  long k = 0;
  for (long i = 0; i < s.w1.rows(); ++i)
    for (long j = 0; j < s.w1.cols(); ++j) theta_grad(k++) = dh(i) * x(j);
  for (long i = 0; i < s.b1.size(); ++i) theta_grad(k++) = dh(i);
  for (long i = 0; i < s.w2.size(); ++i) theta_grad(k++) = h(i);
  theta_grad(k) = 1.0;
  return theta_grad;
}

}  // namespace

Vec ranknet_gradient(const RankingDataset& data, const RankNetScorer& scorer) {
  Vec grad = Vec::Zero(scorer.param_count());
  for (const auto& g : data.groups) {
    const int gold = g.gold();
    Vec scores(g.rows());
    for (int i = 0; i < g.rows(); ++i)
      scores(i) = scorer.score(g.features.row(i).transpose());
    const Vec ggrad = score_gradient(scorer, g.features.row(gold).transpose());
    for (int j = 0; j < g.rows(); ++j) {
      if (j == gold) continue;
      const double d = scores(gold) - scores(j);
      const double coeff = -logistic(-d);
      grad += coeff * (ggrad - score_gradient(scorer, g.features.row(j).transpose()));
    }
  }
  return grad;
}

RankingModel fit_linear_pairwise(const RankingDataset& data, Algorithm algorithm,
                                 const LinearPairwiseParams& params,
                                 std::uint64_t seed) {
  if (algorithm != Algorithm::ranksvm && algorithm != Algorithm::ranknet)
    raise(Errc::config_error, "fit_linear_pairwise expects ranksvm or ranknet");
  data.validate();

  RankingModel m = base_model(algorithm, data, seed);
  fit_standardization(data, &m.feat_mean, &m.feat_scale);
  const RankingDataset std_data = standardize(data, m.feat_mean, m.feat_scale);
  m.hyperparams = {{"eta", params.eta},
                   {"lambda", params.lambda},
                   {"epochs", (double)params.epochs},
                   {"hidden", (double)params.hidden}};

  if (algorithm == Algorithm::ranksvm) {
    const auto pairs = make_pairs(std_data);
    Vec w = Vec::Zero(data.dim());
    std::vector<int> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    const double inv_pairs = pairs.empty() ? 0.0 : 1.0 / (double)pairs.size();

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      if (params.batch) {
        // Step on the mean subgradient so eta is insensitive to corpus size.
        Vec grad = params.lambda * w;
        for (const auto& p : pairs) {
          const auto& g = std_data.groups[(size_t)p.group];
          const Vec diff = (g.features.row(p.pos) - g.features.row(p.neg)).transpose();
          if (w.dot(diff) < 1.0) grad -= diff;
        }
        w -= params.eta * inv_pairs * grad;
      } else {
        std::shuffle(order.begin(), order.end(), rng);
        for (int idx : order) {
          const auto& p = pairs[(size_t)idx];
          const auto& g = std_data.groups[(size_t)p.group];
          const Vec diff = (g.features.row(p.pos) - g.features.row(p.neg)).transpose();
          w *= (1.0 - params.eta * params.lambda * inv_pairs);
          if (w.dot(diff) < 1.0) w += params.eta * diff;
        }
      }
      const double obj = ranksvm_objective(std_data, w, params.lambda);
      if (!std::isfinite(obj))
        raise(Errc::non_finite_loss,
              "ranksvm objective diverged at epoch " + std::to_string(epoch));
    }
    m.weights = w;
    return m;
  }

  // ranknet: full-batch gradient descent on the pairwise logistic loss,
  // stepping on the per-pair mean so eta transfers across corpus sizes.
  RankNetScorer scorer = params.hidden > 0
                             ? RankNetScorer::with_hidden(data.dim(), params.hidden, seed)
                             : RankNetScorer::linear(data.dim());
  std::size_t pair_count = 0;
  for (const auto& g : std_data.groups) pair_count += (std::size_t)g.rows() - 1;
  const double pair_scale = pair_count ? 1.0 / (double)pair_count : 0.0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const Vec grad = ranknet_gradient(std_data, scorer);
    Vec theta = scorer.pack();
    theta -= params.eta * pair_scale * grad;
    scorer.unpack(theta);
    const double loss = ranknet_loss(std_data, scorer);
    if (!std::isfinite(loss))
      raise(Errc::non_finite_loss,
            "ranknet loss diverged at epoch " + std::to_string(epoch));
  }
  m.has_hidden = scorer.hidden;
  if (scorer.hidden) {
    m.w1 = scorer.w1;
    m.b1 = scorer.b1;
    m.w2 = scorer.w2;
    m.b2 = scorer.b2;
  } else {
    m.weights = scorer.w;
  }
  return m;
}

// --- listnet -----------------------------------------------------------------

namespace {

Vec softmax(const Vec& z) {
  const double mx = z.maxCoeff();
  Vec e = (z.array() - mx).exp();
  return e / e.sum();
}

}  // namespace

double listnet_loss(const RankingDataset& data, const Vec& w) {
  double loss = 0.0;
  for (const auto& g : data.groups) {
    const Vec target = softmax(g.labels.cast<double>());
    const Vec s = g.features * w;
    const double mx = s.maxCoeff();
    const double lse = mx + std::log((s.array() - mx).exp().sum());
    for (int j = 0; j < g.rows(); ++j) loss -= target(j) * (s(j) - lse);
  }
  return loss;
}

Vec listnet_gradient(const RankingDataset& data, const Vec& w) {
  Vec grad = Vec::Zero(w.size());
  for (const auto& g : data.groups) {
    const Vec target = softmax(g.labels.cast<double>());
    const Vec p = softmax(g.features * w);
    grad += g.features.transpose() * (p - target);
  }
  return grad;
}

RankingModel fit_listnet(const RankingDataset& data, double eta, int epochs,
                         std::uint64_t seed) {
  data.validate();
  RankingModel m = base_model(Algorithm::listnet, data, seed);
  fit_standardization(data, &m.feat_mean, &m.feat_scale);
  const RankingDataset std_data = standardize(data, m.feat_mean, m.feat_scale);
  m.hyperparams = {{"eta", eta}, {"epochs", (double)epochs}};

  // Mean-gradient steps: eta stays meaningful as the group count grows.
  const double group_scale = 1.0 / (double)std_data.groups.size();
  Vec w = Vec::Zero(data.dim());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    w -= eta * group_scale * listnet_gradient(std_data, w);
    const double loss = listnet_loss(std_data, w);
    if (!std::isfinite(loss))
      raise(Errc::non_finite_loss,
            "listnet loss diverged at epoch " + std::to_string(epoch));
  }
  m.weights = w;
  return m;
}

// --- rankboost ---------------------------------------------------------------

RankingModel fit_rankboost(const RankingDataset& data, int rounds,
                           std::uint64_t seed, double alpha_cap,
                           RankBoostTrace* trace) {
  data.validate();
  if (rounds < 1) raise(Errc::config_error, "rankboost needs rounds >= 1");
  RankingModel m = base_model(Algorithm::rankboost, data, seed);
  m.hyperparams = {{"rounds", (double)rounds}, {"alpha_cap", alpha_cap}};

  const auto pairs = make_pairs(data);
  const int P = (int)pairs.size();
  std::vector<double> D((size_t)P, 1.0 / P);

  // Flatten rows once; each doc keeps its pair incidence.
  struct Row {
    int group, row;
  };
  std::vector<Row> docs;
  std::vector<std::vector<int>> row_of_group(data.groups.size());
  for (int g = 0; g < (int)data.groups.size(); ++g) {
    row_of_group[(size_t)g].resize((size_t)data.groups[(size_t)g].rows());
    for (int r = 0; r < data.groups[(size_t)g].rows(); ++r) {
      row_of_group[(size_t)g][(size_t)r] = (int)docs.size();
      docs.push_back({g, r});
    }
  }
  const int N = (int)docs.size();
  const int F = data.dim();

  // Sorted row order per feature, value descending (stable by doc index).
  std::vector<std::vector<int>> order_desc((size_t)F);
  for (int f = 0; f < F; ++f) {
    auto& ord = order_desc[(size_t)f];
    ord.resize((size_t)N);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
      const double va = data.groups[(size_t)docs[(size_t)a].group].features(
          docs[(size_t)a].row, f);
      const double vb = data.groups[(size_t)docs[(size_t)b].group].features(
          docs[(size_t)b].row, f);
      return va > vb;
    });
  }
  auto value_of = [&](int doc, int f) {
    return data.groups[(size_t)docs[(size_t)doc].group].features(
        docs[(size_t)doc].row, f);
  };

  for (int t = 0; t < rounds; ++t) {
    // Per-doc pair-weight differences under the current distribution.
    std::vector<double> a((size_t)N, 0.0);
    for (int p = 0; p < P; ++p) {
      const auto& pr = pairs[(size_t)p];
      a[(size_t)row_of_group[(size_t)pr.group][(size_t)pr.pos]] += D[(size_t)p];
      a[(size_t)row_of_group[(size_t)pr.group][(size_t)pr.neg]] -= D[(size_t)p];
    }

    double best_abs = 0.0, best_r = 0.0, best_thresh = 0.0;
    int best_f = -1;
    for (int f = 0; f < F; ++f) {
      const auto& ord = order_desc[(size_t)f];
      double cum = 0.0;
      for (int k = 0; k < N; ++k) {
        cum += a[(size_t)ord[(size_t)k]];
        if (k + 1 < N &&
            value_of(ord[(size_t)k], f) == value_of(ord[(size_t)k + 1], f))
          continue;  // same value: threshold must sit between distinct values
        if (k + 1 == N) break;  // below the minimum h is all-ones, r = 0
        const double thresh = 0.5 * (value_of(ord[(size_t)k], f) +
                                     value_of(ord[(size_t)k + 1], f));
        // Scan order (feature asc, value desc) is fixed, so taking the
        // first strict maximum keeps the choice deterministic.
        if (std::abs(cum) > best_abs) {
          best_abs = std::abs(cum);
          best_r = cum;
          best_f = f;
          best_thresh = thresh;
        }
      }
    }
    if (best_f < 0) {
      // Every feature is constant: r = 0 everywhere, nothing to add.
      if (trace) {
        trace->round_r.push_back(0.0);
        trace->dist_total.push_back(
            std::accumulate(D.begin(), D.end(), 0.0));
      }
      break;
    }

    double alpha;
    if (std::abs(best_r) >= 1.0 - 1e-12)
      alpha = best_r > 0 ? alpha_cap : -alpha_cap;  // degenerate round
    else
      alpha = 0.5 * std::log((1.0 + best_r) / (1.0 - best_r));
    alpha = std::clamp(alpha, -alpha_cap, alpha_cap);
    m.stumps.push_back({best_f, best_thresh, alpha});

    // Multiplicative reweighting, renormalized to a distribution.
    double z = 0.0;
    for (int p = 0; p < P; ++p) {
      const auto& pr = pairs[(size_t)p];
      const auto& g = data.groups[(size_t)pr.group];
      const int hp = g.features(pr.pos, best_f) > best_thresh ? 1 : 0;
      const int hn = g.features(pr.neg, best_f) > best_thresh ? 1 : 0;
      D[(size_t)p] *= std::exp(-alpha * (hp - hn));
      z += D[(size_t)p];
    }
    for (auto& d : D) d /= z;

    if (trace) {
      trace->round_r.push_back(best_r);
      trace->dist_total.push_back(std::accumulate(D.begin(), D.end(), 0.0));
    }
  }
  return m;
}

// --- adarank -----------------------------------------------------------------

RankingModel fit_adarank(const RankingDataset& data, int rounds,
                         double alpha_cap) {
  data.validate();
  if (rounds < 1) raise(Errc::config_error, "adarank needs rounds >= 1");
  RankingModel m = base_model(Algorithm::adarank, data, 0);
  m.hyperparams = {{"rounds", (double)rounds}, {"alpha_cap", alpha_cap}};

  const int Q = (int)data.groups.size();
  const int F = data.dim();

  // E(q) per weak ranker is independent of the query weights; precompute.
  // Ranker index: 2f for +feature, 2f+1 for -feature.
  std::vector<std::vector<char>> E((size_t)(2 * F));
  for (int f = 0; f < F; ++f) {
    for (int s = 0; s < 2; ++s) {
      auto& e = E[(size_t)(2 * f + s)];
      e.resize((size_t)Q);
      const double sign = s == 0 ? 1.0 : -1.0;
      for (int q = 0; q < Q; ++q) {
        const auto& g = data.groups[(size_t)q];
        const Vec scores = sign * g.features.col(f);
        e[(size_t)q] = group_argmax(scores) == g.gold();
      }
    }
  }

  std::vector<double> D((size_t)Q, 1.0 / Q);
  double prev_acc = -1.0;

  for (int t = 0; t < rounds; ++t) {
    int best = -1;
    double best_score = -1.0;
    for (int k = 0; k < 2 * F; ++k) {
      double s = 0.0;
      for (int q = 0; q < Q; ++q) s += D[(size_t)q] * E[(size_t)k][(size_t)q];
      if (s > best_score) {
        best_score = s;
        best = k;
      }
    }

    double num = 0.0, den = 0.0;
    for (int q = 0; q < Q; ++q) {
      num += D[(size_t)q] * (1.0 + E[(size_t)best][(size_t)q]);
      den += D[(size_t)q] * (1.0 - E[(size_t)best][(size_t)q]);
    }
    double alpha = den <= 1e-300 ? alpha_cap : 0.5 * std::log(num / den);
    alpha = std::clamp(alpha, -alpha_cap, alpha_cap);

    m.rankers.push_back(
        {best / 2, best % 2 == 0 ? 1.0 : -1.0, alpha});

    const double acc = training_accuracy(m, data);
    if (t > 0 && acc <= prev_acc) {
      m.rankers.pop_back();
      if ((int)m.rankers.size() == 1) m.no_improvement_warning = true;
      break;
    }
    prev_acc = acc;

    double z = 0.0;
    for (int q = 0; q < Q; ++q) {
      D[(size_t)q] *= std::exp(-alpha * E[(size_t)best][(size_t)q]);
      z += D[(size_t)q];
    }
    for (auto& d : D) d /= z;
  }
  return m;
}

// --- coordinate ascent --------------------------------------------------------

namespace {

double accuracy_of_weights(const RankingDataset& data, const Vec& w) {
  int correct = 0;
  for (const auto& g : data.groups)
    correct += argmax_canonical(g.features * w) == g.gold();
  return (double)correct / (double)data.groups.size();
}

}  // namespace

RankingModel fit_coordinate_ascent(const RankingDataset& data,
                                   const CoordinateAscentParams& params,
                                   std::uint64_t seed) {
  data.validate();
  if (params.restarts < 1)
    raise(Errc::config_error, "coordinate ascent needs restarts >= 1");
  RankingModel m = base_model(Algorithm::coordinate_ascent, data, seed);
  fit_standardization(data, &m.feat_mean, &m.feat_scale);
  const RankingDataset std_data = standardize(data, m.feat_mean, m.feat_scale);
  m.hyperparams = {{"restarts", (double)params.restarts},
                   {"tolerance", params.tolerance}};

  // Powers-of-two value ladder tried for each coordinate in turn.
  std::vector<double> grid{0.0};
  for (int k = -3; k <= 4; ++k) {
    grid.push_back(std::ldexp(1.0, k));
    grid.push_back(-std::ldexp(1.0, k));
  }

  const int F = data.dim();
  Vec best_w = Vec::Zero(F);
  double best_acc = -1.0;

  for (int restart = 0; restart < params.restarts; ++restart) {
    std::mt19937_64 rng(mix_seed(seed, (std::uint64_t)restart));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec w(F);
    for (int f = 0; f < F; ++f) w(f) = restart == 0 ? 0.0 : u(rng);

    double acc = accuracy_of_weights(std_data, w);
    for (int cycle = 0; cycle < params.max_cycles; ++cycle) {
      const double cycle_start = acc;
      for (int f = 0; f < F; ++f) {
        double best_val = w(f);
        double best_here = acc;
        for (double cand : grid) {
          if (cand == w(f)) continue;
          Vec trial = w;
          trial(f) = cand;
          const double a = accuracy_of_weights(std_data, trial);
          if (a > best_here) {  // strict improvement only
            best_here = a;
            best_val = cand;
          }
        }
        w(f) = best_val;
        acc = best_here;
      }
      if (acc - cycle_start < params.tolerance) break;
    }
    if (acc > best_acc) {
      best_acc = acc;
      best_w = w;
    }
  }
  m.weights = best_w;
  return m;
}

// --- mart / lambdamart ---------------------------------------------------------

namespace {

// Pooled design matrix across groups, with group bookkeeping.
struct Pooled {
  Mat X;
  Vec label;
  std::vector<int> group_of;
  std::vector<std::vector<int>> rows_of_group;
};

Pooled pool_rows(const RankingDataset& data) {
  Pooled p;
  p.X.resize((long)data.total_rows(), data.dim());
  p.label.resize((long)data.total_rows());
  p.rows_of_group.resize(data.groups.size());
  long k = 0;
  for (size_t g = 0; g < data.groups.size(); ++g) {
    for (int r = 0; r < data.groups[g].rows(); ++r, ++k) {
      p.X.row(k) = data.groups[g].features.row(r);
      p.label(k) = data.groups[g].labels(r);
      p.group_of.push_back((int)g);
      p.rows_of_group[g].push_back((int)k);
    }
  }
  return p;
}

// Lambda pseudo-gradients and Newton weights for one group under the
// current scores (binary single-positive relevance, NDCG gains 2^rel - 1).
void group_lambdas(const std::vector<int>& rows, const Vec& label,
                   const Vec& scores, Vec* lambda, Vec* weight) {
  const int n = (int)rows.size();
  int gold = -1;
  for (int i = 0; i < n; ++i)
    if (label(rows[(size_t)i]) > 0.5) gold = i;
  if (gold < 0) return;

  // Ranks under descending score, ties by position.
  std::vector<int> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores(rows[(size_t)a]) > scores(rows[(size_t)b]);
  });
  std::vector<int> rank((size_t)n);
  for (int pos = 0; pos < n; ++pos) rank[(size_t)order[(size_t)pos]] = pos + 1;

  // IDCG = 1 (single positive with gain 1 at rank 1), so
  // NDCG = 1/log2(1 + rank_gold) and a gold<->j swap moves it by the
  // discount difference.
  const double sg = scores(rows[(size_t)gold]);
  for (int j = 0; j < n; ++j) {
    if (j == gold) continue;
    const double delta =
        std::abs(1.0 / std::log2(1.0 + rank[(size_t)gold]) -
                 1.0 / std::log2(1.0 + rank[(size_t)j]));
    const double rho = logistic(-(sg - scores(rows[(size_t)j])));
    (*lambda)(rows[(size_t)gold]) += rho * delta;
    (*lambda)(rows[(size_t)j]) -= rho * delta;
    (*weight)(rows[(size_t)gold]) += rho * (1.0 - rho) * delta;
    (*weight)(rows[(size_t)j]) += rho * (1.0 - rho) * delta;
  }
}

}  // namespace

RankingModel fit_gbdt(const RankingDataset& data, Algorithm algorithm,
                      const GbdtParams& params, std::uint64_t seed) {
  if (algorithm != Algorithm::mart && algorithm != Algorithm::lambdamart)
    raise(Errc::config_error, "fit_gbdt expects mart or lambdamart");
  data.validate();
  if (params.trees < 1 || params.shrinkage <= 0 || params.shrinkage > 1 ||
      params.max_leaves < 2)
    raise(Errc::config_error, "bad gbdt parameters");

  RankingModel m = base_model(algorithm, data, seed);
  m.shrinkage = params.shrinkage;
  m.hyperparams = {{"trees", (double)params.trees},
                   {"shrinkage", params.shrinkage},
                   {"max_leaves", (double)params.max_leaves},
                   {"min_samples_leaf", (double)params.min_samples_leaf}};

  const Pooled pooled = pool_rows(data);
  const long N = pooled.X.rows();
  std::vector<int> all_rows((size_t)N);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  Vec scores = Vec::Zero(N);
  TreeBuildConfig cfg;
  cfg.max_leaves = params.max_leaves;
  cfg.min_samples_leaf = params.min_samples_leaf;

  for (int t = 0; t < params.trees; ++t) {
    RegressionTree tree;
    if (algorithm == Algorithm::mart) {
      const Vec residual = pooled.label - scores;
      tree = build_regression_tree(
          pooled.X, residual, all_rows, cfg, [&](const std::vector<int>& rows) {
            double s = 0.0;
            for (int r : rows) s += residual(r);
            return rows.empty() ? 0.0 : s / (double)rows.size();
          });
    } else {
      Vec lambda = Vec::Zero(N), weight = Vec::Zero(N);
      for (const auto& rows : pooled.rows_of_group)
        group_lambdas(rows, pooled.label, scores, &lambda, &weight);
      tree = build_regression_tree(
          pooled.X, lambda, all_rows, cfg, [&](const std::vector<int>& rows) {
            double num = 0.0, den = 0.0;
            for (int r : rows) {
              num += lambda(r);
              den += weight(r);
            }
            return den > 1e-300 ? num / den : 0.0;  // Newton step per leaf
          });
    }
    for (long r = 0; r < N; ++r)
      scores(r) += params.shrinkage * tree.eval(pooled.X.row(r).transpose());
    m.trees.push_back(std::move(tree));
  }
  return m;
}

RankingModel fit_random_forest(const RankingDataset& data,
                               const ForestParams& params, std::uint64_t seed) {
  data.validate();
  if (params.trees < 1 || params.feature_fraction <= 0 ||
      params.feature_fraction > 1 || params.sample_fraction <= 0 ||
      params.sample_fraction > 1)
    raise(Errc::config_error, "bad forest parameters");

  RankingModel m = base_model(Algorithm::random_forest, data, seed);
  m.average_trees = true;
  m.shrinkage = 1.0;
  m.hyperparams = {{"trees", (double)params.trees},
                   {"feature_fraction", params.feature_fraction},
                   {"sample_fraction", params.sample_fraction},
                   {"max_leaves", (double)params.max_leaves},
                   {"min_samples_leaf", (double)params.min_samples_leaf}};

  const Pooled pooled = pool_rows(data);
  const int G = (int)data.groups.size();
  const int take = std::max(1, (int)std::ceil(params.sample_fraction * G));

  for (int t = 0; t < params.trees; ++t) {
    std::mt19937_64 rng(mix_seed(seed, (std::uint64_t)t));

    // Group subsample without replacement, so fraction 1.0 is the full set.
    std::vector<int> gidx((size_t)G);
    std::iota(gidx.begin(), gidx.end(), 0);
    if (take < G) std::shuffle(gidx.begin(), gidx.end(), rng);
    gidx.resize((size_t)take);
    std::sort(gidx.begin(), gidx.end());

    std::vector<int> rows;
    for (int g : gidx)
      rows.insert(rows.end(), pooled.rows_of_group[(size_t)g].begin(),
                  pooled.rows_of_group[(size_t)g].end());

    TreeBuildConfig cfg;
    cfg.max_leaves = params.max_leaves;
    cfg.min_samples_leaf = params.min_samples_leaf;
    cfg.feature_fraction = params.feature_fraction;
    cfg.rng = params.feature_fraction < 1.0 ? &rng : nullptr;

    m.trees.push_back(build_regression_tree(
        pooled.X, pooled.label, rows, cfg, [&](const std::vector<int>& leaf) {
          double s = 0.0;
          for (int r : leaf) s += pooled.label(r);
          return leaf.empty() ? 0.0 : s / (double)leaf.size();
        }));
  }
  return m;
}

// --- dispatcher ----------------------------------------------------------------

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& key,
                double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_keys(const std::map<std::string, double>& p,
                std::initializer_list<const char*> allowed) {
  for (const auto& [k, _] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) raise(Errc::config_error, "unknown hyperparameter '" + k + "'");
  }
}

}  // namespace

RankingModel train_model(const RankingDataset& data, Algorithm algorithm,
                         const std::map<std::string, double>& params,
                         std::uint64_t seed) {
  switch (algorithm) {
    case Algorithm::ranksvm: {
      check_keys(params, {"eta", "lambda", "epochs", "batch"});
      LinearPairwiseParams p;
      p.eta = param_or(params, "eta", 0.01);
      p.lambda = param_or(params, "lambda", 1e-4);
      p.epochs = (int)param_or(params, "epochs", 100);
      p.batch = param_or(params, "batch", 0) != 0;
      return fit_linear_pairwise(data, algorithm, p, seed);
    }
    case Algorithm::ranknet: {
      check_keys(params, {"eta", "epochs", "hidden"});
      LinearPairwiseParams p;
      p.eta = param_or(params, "eta", 0.005);
      p.epochs = (int)param_or(params, "epochs", 100);
      p.hidden = (int)param_or(params, "hidden", 0);
      return fit_linear_pairwise(data, algorithm, p, seed);
    }
    case Algorithm::rankboost:
      check_keys(params, {"rounds", "alpha_cap"});
      return fit_rankboost(data, (int)param_or(params, "rounds", 300), seed,
                           param_or(params, "alpha_cap", 10.0));
    case Algorithm::adarank:
      check_keys(params, {"rounds", "alpha_cap"});
      return fit_adarank(data, (int)param_or(params, "rounds", 500),
                         param_or(params, "alpha_cap", 10.0));
    case Algorithm::coordinate_ascent: {
      check_keys(params, {"restarts", "tolerance", "max_cycles"});
      CoordinateAscentParams p;
      p.restarts = (int)param_or(params, "restarts", 5);
      p.tolerance = param_or(params, "tolerance", 1e-4);
      p.max_cycles = (int)param_or(params, "max_cycles", 50);
      return fit_coordinate_ascent(data, p, seed);
    }
    case Algorithm::listnet:
      check_keys(params, {"eta", "epochs"});
      return fit_listnet(data, param_or(params, "eta", 0.01),
                         (int)param_or(params, "epochs", 100), seed);
    case Algorithm::mart:
    case Algorithm::lambdamart: {
      check_keys(params, {"trees", "shrinkage", "max_leaves", "min_samples_leaf"});
      GbdtParams p;
      p.trees = (int)param_or(params, "trees", 1000);
      p.shrinkage = param_or(params, "shrinkage", 0.1);
      p.max_leaves = (int)param_or(params, "max_leaves", 10);
      p.min_samples_leaf = (int)param_or(params, "min_samples_leaf", 1);
      return fit_gbdt(data, algorithm, p, seed);
    }
    case Algorithm::random_forest: {
      check_keys(params, {"trees", "feature_fraction", "sample_fraction",
                          "max_leaves", "min_samples_leaf"});
      ForestParams p;
      p.trees = (int)param_or(params, "trees", 300);
      p.feature_fraction = param_or(params, "feature_fraction", 0.3);
      p.sample_fraction = param_or(params, "sample_fraction", 0.7);
      p.max_leaves = (int)param_or(params, "max_leaves", 10);
      p.min_samples_leaf = (int)param_or(params, "min_samples_leaf", 1);
      return fit_random_forest(data, p, seed);
    }
  }
  raise(Errc::config_error, "unknown algorithm");
}

}  // namespace clozerank::ltr
