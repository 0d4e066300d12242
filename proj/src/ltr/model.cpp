#include "clozerank/ltr/model.hpp"

#include <cmath>
#include <sstream>

#include "clozerank/error.hpp"
#include "clozerank/text_util.hpp"

namespace clozerank::ltr {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::ranksvm: return "ranksvm";
    case Algorithm::ranknet: return "ranknet";
    case Algorithm::rankboost: return "rankboost";
    case Algorithm::adarank: return "adarank";
    case Algorithm::coordinate_ascent: return "coordinate_ascent";
    case Algorithm::listnet: return "listnet";
    case Algorithm::mart: return "mart";
    case Algorithm::lambdamart: return "lambdamart";
    case Algorithm::random_forest: return "random_forest";
  }
  return "?";
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all = {
      Algorithm::ranksvm,   Algorithm::ranknet,
      Algorithm::rankboost, Algorithm::adarank,
      Algorithm::coordinate_ascent, Algorithm::listnet,
      Algorithm::mart,      Algorithm::lambdamart,
      Algorithm::random_forest};
  return all;
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  for (Algorithm a : all_algorithms())
    if (name == algorithm_name(a)) return a;
  return std::nullopt;
}

double RegressionTree::eval(Eigen::Ref<const Vec> x) const {
  int n = 0;
  while (true) {
    const Node& node = nodes[(size_t)n];
    if (node.feature < 0) return node.value;
    n = x(node.feature) <= node.threshold ? node.left : node.right;
  }
}

int RegressionTree::leaf_count() const {
  int c = 0;
  for (const auto& n : nodes) c += n.feature < 0;
  return c;
}

namespace {

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double RankingModel::score(Eigen::Ref<const Vec> v) const {
  if ((int)v.size() != dim)
    raise(Errc::schema_mismatch,
          "feature vector has " + std::to_string(v.size()) +
              " entries, model expects " + std::to_string(dim));

  Vec x = v;
  if (feat_mean.size() == dim && feat_scale.size() == dim)
    x = (x - feat_mean).cwiseQuotient(feat_scale);

  switch (algorithm) {
    case Algorithm::ranksvm:
    case Algorithm::listnet:
    case Algorithm::coordinate_ascent:
      return weights.dot(x);
    case Algorithm::ranknet: {
      if (!has_hidden) return weights.dot(x);
      const Vec h = (w1 * x + b1).unaryExpr([](double z) { return logistic(z); });
      return w2.dot(h) + b2;
    }
    case Algorithm::rankboost: {
      double s = 0.0;
      for (const auto& st : stumps)
        if (x(st.feature) > st.threshold) s += st.weight;
      return s;
    }
    case Algorithm::adarank: {
      double s = 0.0;
      for (const auto& r : rankers) s += r.weight * r.sign * x(r.feature);
      return s;
    }
    case Algorithm::mart:
    case Algorithm::lambdamart:
    case Algorithm::random_forest: {
      double s = 0.0;
      for (const auto& t : trees) s += t.eval(x);
      if (average_trees && !trees.empty()) return s / (double)trees.size();
      return shrinkage * s;
    }
  }
  return 0.0;
}

Vec RankingModel::score_group(const RankedGroup& g) const {
  Vec s(g.rows());
  for (int i = 0; i < g.rows(); ++i) s(i) = score(g.features.row(i).transpose());
  return s;
}

int argmax_canonical(const Vec& scores) {
  int best = 0;
  for (int i = 1; i < scores.size(); ++i)
    if (scores(i) > scores(best)) best = i;
  return best;
}

int predict(const RankingModel& model, const RankedGroup& group) {
  if (group.rows() == 0) raise(Errc::empty_group, "group " + group.qid);
  return argmax_canonical(model.score_group(group));
}

// --- serialization ----------------------------------------------------------

namespace {

constexpr const char* kMagic = "clozerank-model";
constexpr int kVersion = 1;

void put_vec(std::ostream& out, const char* tag, const Vec& v) {
  out << tag << " " << v.size();
  for (long i = 0; i < v.size(); ++i) out << " " << format_exact(v(i));
  out << "\n";
}

void put_tree(std::ostream& out, const RegressionTree& t) {
  out << "tree " << t.nodes.size() << "\n";
  for (const auto& n : t.nodes) {
    if (n.feature < 0)
      out << "leaf " << format_exact(n.value) << "\n";
    else
      out << "split " << n.feature << " " << format_exact(n.threshold) << " "
          << n.left << " " << n.right << "\n";
  }
}

struct Reader {
  std::istringstream in;
  std::string source;
  explicit Reader(const std::string& text, std::string src)
      : in(text), source(std::move(src)) {}

  std::string next_line() {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return line;
    }
    raise(Errc::corrupt_model, source + ": unexpected end of file");
  }

  template <typename T>
  T expect(std::istringstream& ls, const char* what) {
    T v{};
    if (!(ls >> v)) raise(Errc::corrupt_model, source + ": expected " + what);
    return v;
  }

  Vec read_vec(const char* tag) {
    std::istringstream ls(next_line());
    std::string got;
    ls >> got;
    if (got != tag)
      raise(Errc::corrupt_model, source + ": expected '" + tag + "', got '" + got + "'");
    const long n = expect<long>(ls, "vector length");
    Vec v(n);
    for (long i = 0; i < n; ++i) v(i) = expect<double>(ls, "vector entry");
    return v;
  }
};

}  // namespace

std::string format_model(const RankingModel& m) {
  std::ostringstream out;
  out << kMagic << " v" << kVersion << "\n";
  out << "algorithm " << algorithm_name(m.algorithm) << "\n";
  out << "schema " << (m.schema_id.empty() ? "-" : m.schema_id) << "\n";
  out << "dim " << m.dim << "\n";
  out << "seed " << m.seed << "\n";
  out << "warning_no_improvement " << (m.no_improvement_warning ? 1 : 0) << "\n";
  out << "hyperparams " << m.hyperparams.size() << "\n";
  for (const auto& [k, v] : m.hyperparams)
    out << "param " << k << " " << format_exact(v) << "\n";

  const bool standardized = m.feat_mean.size() == m.dim && m.dim > 0;
  out << "standardized " << (standardized ? 1 : 0) << "\n";
  if (standardized) {
    put_vec(out, "mean", m.feat_mean);
    put_vec(out, "scale", m.feat_scale);
  }

  switch (m.algorithm) {
    case Algorithm::ranksvm:
    case Algorithm::listnet:
    case Algorithm::coordinate_ascent:
      put_vec(out, "weights", m.weights);
      break;
    case Algorithm::ranknet:
      out << "hidden " << (m.has_hidden ? m.w1.rows() : 0) << "\n";
      if (!m.has_hidden) {
        put_vec(out, "weights", m.weights);
      } else {
        for (long r = 0; r < m.w1.rows(); ++r)
          put_vec(out, "w1row", m.w1.row(r).transpose());
        put_vec(out, "b1", m.b1);
        put_vec(out, "w2", m.w2);
        out << "b2 " << format_exact(m.b2) << "\n";
      }
      break;
    case Algorithm::rankboost:
      out << "stumps " << m.stumps.size() << "\n";
      for (const auto& s : m.stumps)
        out << "stump " << s.feature << " " << format_exact(s.threshold) << " "
            << format_exact(s.weight) << "\n";
      break;
    case Algorithm::adarank:
      out << "rankers " << m.rankers.size() << "\n";
      for (const auto& r : m.rankers)
        out << "ranker " << r.feature << " " << format_exact(r.sign) << " "
            << format_exact(r.weight) << "\n";
      break;
    case Algorithm::mart:
    case Algorithm::lambdamart:
    case Algorithm::random_forest:
      out << "trees " << m.trees.size() << " shrinkage "
          << format_exact(m.shrinkage) << " average " << (m.average_trees ? 1 : 0)
          << "\n";
      for (const auto& t : m.trees) put_tree(out, t);
      break;
  }
  out << "end\n";
  return out.str();
}

void save_model(const RankingModel& m, const std::string& path) {
  write_file(path, format_model(m));
}

RankingModel parse_model(const std::string& text, const std::string& source_name) {
  Reader r(text, source_name);

  {
    std::istringstream ls(r.next_line());
    std::string magic, version;
    ls >> magic >> version;
    if (magic != kMagic)
      raise(Errc::corrupt_model, source_name + ": not a model file");
    if (version != "v" + std::to_string(kVersion))
      raise(Errc::version_mismatch,
            source_name + ": unsupported version '" + version + "'");
  }

  RankingModel m;
  auto expect_key = [&](const char* key) -> std::istringstream {
    std::istringstream ls(r.next_line());
    std::string got;
    ls >> got;
    if (got != key)
      raise(Errc::corrupt_model,
            source_name + ": expected '" + std::string(key) + "', got '" + got + "'");
    return ls;
  };

  {
    auto ls = expect_key("algorithm");
    std::string name;
    ls >> name;
    const auto a = algorithm_from_name(name);
    if (!a) raise(Errc::corrupt_model, source_name + ": unknown algorithm " + name);
    m.algorithm = *a;
  }
  {
    auto ls = expect_key("schema");
    std::string s;
    ls >> s;
    m.schema_id = s == "-" ? "" : s;
  }
  {
    auto ls = expect_key("dim");
    m.dim = (int)r.expect<long>(ls, "dim");
  }
  {
    auto ls = expect_key("seed");
    m.seed = r.expect<std::uint64_t>(ls, "seed");
  }
  {
    auto ls = expect_key("warning_no_improvement");
    m.no_improvement_warning = r.expect<int>(ls, "flag") != 0;
  }
  {
    auto ls = expect_key("hyperparams");
    const long n = r.expect<long>(ls, "hyperparam count");
    for (long i = 0; i < n; ++i) {
      auto pls = expect_key("param");
      const auto key = r.expect<std::string>(pls, "param name");
      m.hyperparams[key] = r.expect<double>(pls, "param value");
    }
  }
  {
    auto ls = expect_key("standardized");
    if (r.expect<int>(ls, "flag") != 0) {
      m.feat_mean = r.read_vec("mean");
      m.feat_scale = r.read_vec("scale");
      if (m.feat_mean.size() != m.dim || m.feat_scale.size() != m.dim)
        raise(Errc::corrupt_model, source_name + ": standardization size mismatch");
    }
  }

  switch (m.algorithm) {
    case Algorithm::ranksvm:
    case Algorithm::listnet:
    case Algorithm::coordinate_ascent:
      m.weights = r.read_vec("weights");
      break;
    case Algorithm::ranknet: {
      auto ls = expect_key("hidden");
      const long h = r.expect<long>(ls, "hidden width");
      m.has_hidden = h > 0;
      if (!m.has_hidden) {
        m.weights = r.read_vec("weights");
      } else {
        m.w1.resize(h, m.dim);
        for (long row = 0; row < h; ++row) {
          const Vec v = r.read_vec("w1row");
          if (v.size() != m.dim)
            raise(Errc::corrupt_model, source_name + ": w1 row size mismatch");
          m.w1.row(row) = v.transpose();
        }
        m.b1 = r.read_vec("b1");
        m.w2 = r.read_vec("w2");
        auto bls = expect_key("b2");
        m.b2 = r.expect<double>(bls, "b2");
      }
      break;
    }
    case Algorithm::rankboost: {
      auto ls = expect_key("stumps");
      const long n = r.expect<long>(ls, "stump count");
      for (long i = 0; i < n; ++i) {
        auto sls = expect_key("stump");
        Stump s;
        s.feature = r.expect<int>(sls, "stump feature");
        s.threshold = r.expect<double>(sls, "stump threshold");
        s.weight = r.expect<double>(sls, "stump weight");
        m.stumps.push_back(s);
      }
      break;
    }
    case Algorithm::adarank: {
      auto ls = expect_key("rankers");
      const long n = r.expect<long>(ls, "ranker count");
      for (long i = 0; i < n; ++i) {
        auto rls = expect_key("ranker");
        FeatureRanker fr;
        fr.feature = r.expect<int>(rls, "ranker feature");
        fr.sign = r.expect<double>(rls, "ranker sign");
        fr.weight = r.expect<double>(rls, "ranker weight");
        m.rankers.push_back(fr);
      }
      break;
    }
    case Algorithm::mart:
    case Algorithm::lambdamart:
    case Algorithm::random_forest: {
      auto ls = expect_key("trees");
      const long n = r.expect<long>(ls, "tree count");
      std::string kw;
      ls >> kw;
      if (kw != "shrinkage")
        raise(Errc::corrupt_model, source_name + ": expected shrinkage");
      m.shrinkage = r.expect<double>(ls, "shrinkage");
      ls >> kw;
      if (kw != "average")
        raise(Errc::corrupt_model, source_name + ": expected average flag");
      m.average_trees = r.expect<int>(ls, "average flag") != 0;
      for (long t = 0; t < n; ++t) {
        auto tls = expect_key("tree");
        const long nodes = r.expect<long>(tls, "node count");
        RegressionTree tree;
        for (long k = 0; k < nodes; ++k) {
          std::istringstream nls(r.next_line());
          std::string tag;
          nls >> tag;
          RegressionTree::Node node;
          if (tag == "leaf") {
            node.value = r.expect<double>(nls, "leaf value");
          } else if (tag == "split") {
            node.feature = r.expect<int>(nls, "split feature");
            node.threshold = r.expect<double>(nls, "split threshold");
            node.left = r.expect<int>(nls, "left child");
            node.right = r.expect<int>(nls, "right child");
            if (node.feature < 0 || node.feature >= m.dim)
              raise(Errc::corrupt_model, source_name + ": split feature out of range");
          } else {
            raise(Errc::corrupt_model, source_name + ": bad tree node '" + tag + "'");
          }
          tree.nodes.push_back(node);
        }
        for (const auto& node : tree.nodes) {
          if (node.feature >= 0 &&
              (node.left < 0 || node.left >= (int)tree.nodes.size() ||
               node.right < 0 || node.right >= (int)tree.nodes.size()))
            raise(Errc::corrupt_model, source_name + ": tree child out of range");
        }
        m.trees.push_back(std::move(tree));
      }
      break;
    }
  }

  {
    std::istringstream ls(r.next_line());
    std::string tag;
    ls >> tag;
    if (tag != "end")
      raise(Errc::corrupt_model, source_name + ": missing end marker");
  }
  return m;
}

RankingModel load_model(const std::string& path) {
  return parse_model(read_file(path), path);
}

}  // namespace clozerank::ltr
