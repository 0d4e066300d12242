#include "clozerank/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "clozerank/error.hpp"
#include "clozerank/text_util.hpp"
#include "clozerank/transport.hpp"

namespace clozerank {

namespace {

constexpr FeatureKind kCanonicalOrder[] = {
    FeatureKind::Freq, FeatureKind::WA, FeatureKind::Nbow, FeatureKind::Wmd,
    FeatureKind::Pos,  FeatureKind::Dep, FeatureKind::FS};

}  // namespace

const char* feature_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Freq: return "FREQ";
    case FeatureKind::WA: return "WA";
    case FeatureKind::Nbow: return "NBOW";
    case FeatureKind::Wmd: return "WMD";
    case FeatureKind::Pos: return "POS";
    case FeatureKind::Dep: return "DEP";
    case FeatureKind::FS: return "FS";
  }
  return "?";
}

int feature_width(FeatureKind k) {
  switch (k) {
    case FeatureKind::Freq: return 2;
    case FeatureKind::Dep: return 3;
    case FeatureKind::FS: return 7;
    default: return 1;
  }
}

std::optional<FeatureKind> feature_from_name(const std::string& name) {
  const std::string up = [&] {
    std::string u = name;
    std::transform(u.begin(), u.end(), u.begin(), ::toupper);
    return u;
  }();
  for (FeatureKind k : kCanonicalOrder)
    if (up == feature_name(k)) return k;
  if (up == "NBOW" || up == "N-BOW") return FeatureKind::Nbow;
  return std::nullopt;
}

bool FeatureConfig::has(FeatureKind k) const {
  return std::find(enabled.begin(), enabled.end(), k) != enabled.end();
}

FeatureConfig& FeatureConfig::set_enabled(std::vector<FeatureKind> kinds) {
  enabled.clear();
  for (FeatureKind k : kCanonicalOrder)
    if (std::find(kinds.begin(), kinds.end(), k) != kinds.end())
      enabled.push_back(k);
  if (enabled.empty())
    raise(Errc::config_error, "feature set must not be empty");
  return *this;
}

std::vector<FeatureKind> FeatureConfig::parse_feature_list(const std::string& csv) {
  std::vector<FeatureKind> kinds;
  for (const auto& part : split_char(csv, ',')) {
    const std::string name = trim(part);
    if (name.empty()) continue;
    const auto k = feature_from_name(name);
    if (!k) raise(Errc::config_error, "unknown feature '" + name + "'");
    kinds.push_back(*k);
  }
  return kinds;
}

int FeatureConfig::dim() const {
  int d = 0;
  for (FeatureKind k : enabled) d += feature_width(k);
  return d;
}

std::string FeatureConfig::schema_id() const {
  std::vector<std::string> names;
  for (FeatureKind k : enabled) names.push_back(feature_name(k));
  return join(names, "+");
}

std::vector<std::string> FeatureConfig::column_names() const {
  std::vector<std::string> cols;
  for (FeatureKind k : enabled) {
    switch (k) {
      case FeatureKind::Freq:
        cols.push_back("FREQ_doc");
        cols.push_back("FREQ_query");
        break;
      case FeatureKind::Dep:
        cols.push_back("DEP_sa_or_ta");
        cols.push_back("DEP_st");
        cols.push_back("DEP_sta");
        break;
      case FeatureKind::FS:
        for (const char* s : {"FS_t", "FS_f", "FS_e", "FS_tf", "FS_te",
                              "FS_fe", "FS_tfe"})
          cols.push_back(s);
        break;
      default:
        cols.push_back(feature_name(k));
    }
  }
  return cols;
}

bool FeatureConfig::needs_annotations(bool coref) const {
  return coref || has(FeatureKind::Pos) || has(FeatureKind::Dep) ||
         has(FeatureKind::FS);
}

bool FeatureConfig::needs_embeddings() const { return has(FeatureKind::Wmd); }

// --- operations -------------------------------------------------------------

std::pair<int, int> frequency(const QuestionInstance& q,
                              const std::string& candidate) {
  if (std::find(q.candidates.begin(), q.candidates.end(), candidate) ==
      q.candidates.end())
    raise(Errc::unknown_candidate, candidate + " is not a candidate");
  const int doc = (int)std::count(q.document.begin(), q.document.end(), candidate);
  const int query = (int)std::count(q.query.begin(), q.query.end(), candidate);
  return {doc, query};
}

namespace {

// Shared alignment arithmetic: sequences indexed relative to their anchors,
// each non-anchor hypothesis item matched to the closest same-valued
// sentence item, penalty when unmatched.
template <typename Seq>
double relative_alignment(const Seq& hyp, int hyp_anchor, const Seq& sent,
                          int sent_anchor, double penalty) {
  double total = 0.0;
  for (int qi = 0; qi < (int)hyp.size(); ++qi) {
    if (qi == hyp_anchor) continue;
    const long iq = qi - hyp_anchor;
    double best = std::numeric_limits<double>::infinity();
    for (int sj = 0; sj < (int)sent.size(); ++sj) {
      if (sent[sj] != hyp[qi]) continue;
      const long js = sj - sent_anchor;
      best = std::min(best, (double)std::labs(iq - js));
    }
    total += std::isfinite(best) ? best : penalty;
  }
  return -total / (double)hyp.size();
}

}  // namespace

double word_alignment(const Tokens& hypothesis, int hyp_anchor,
                      const Tokens& sentence, const std::string& candidate,
                      double penalty) {
  const auto it = std::find(sentence.begin(), sentence.end(), candidate);
  if (it == sentence.end())
    raise(Errc::entity_absent, candidate + " not in sentence");
  const int sent_anchor = (int)(it - sentence.begin());
  return relative_alignment(hypothesis, hyp_anchor, sentence, sent_anchor,
                            penalty);
}

double word_alignment(const HypothesisQuery& hypothesis, const Tokens& sentence,
                      double penalty) {
  return word_alignment(hypothesis.tokens, hypothesis.candidate_pos, sentence,
                        hypothesis.candidate, penalty);
}

double pos_alignment(const std::vector<std::string>& hyp_pos,
                     const std::vector<std::string>& sent_pos,
                     std::pair<int, int> anchors, double penalty) {
  if (anchors.first < 0 || anchors.first >= (int)hyp_pos.size() ||
      anchors.second < 0 || anchors.second >= (int)sent_pos.size())
    raise(Errc::entity_absent, "alignment anchor out of range");
  return relative_alignment(hyp_pos, anchors.first, sent_pos, anchors.second,
                            penalty);
}

Eigen::SparseVector<double> nbow_vector(
    const Tokens& tokens,
    const std::unordered_map<std::string, int>& vocabulary) {
  std::map<int, double> counts;
  double total = 0.0;
  for (const auto& tok : tokens) {
    auto it = vocabulary.find(tok);
    if (it == vocabulary.end()) continue;
    counts[it->second] += 1.0;
    total += 1.0;
  }
  if (counts.empty())
    raise(Errc::all_out_of_vocabulary, "no token is in vocabulary");
  Eigen::SparseVector<double> v((long)vocabulary.size());
  v.reserve((long)counts.size());
  for (const auto& [idx, c] : counts) v.insert(idx) = c / total;
  return v;
}

double nbow_similarity(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::unordered_map<std::string, int> vocab;
  for (const auto& t : a) vocab.emplace(t, (int)vocab.size());
  for (const auto& t : b) vocab.emplace(t, (int)vocab.size());
  const auto va = nbow_vector(a, vocab);
  const auto vb = nbow_vector(b, vocab);
  const double denom = std::sqrt(va.squaredNorm()) * std::sqrt(vb.squaredNorm());
  if (denom <= 0) return 0.0;
  return va.dot(vb) / denom;
}

double wmd_sentinel(const EmbeddingTable& emb) {
  return 2.0 * emb.max_pairwise_distance();
}

namespace {

// Unique in-vocabulary words with normalized masses.
struct MassPoints {
  std::vector<int> word_ids;
  Vec mass;
};

MassPoints nbow_masses(const Tokens& tokens, const EmbeddingTable& emb) {
  std::map<int, double> counts;
  double total = 0.0;
  for (const auto& tok : tokens) {
    if (auto id = emb.find(tok)) {
      counts[*id] += 1.0;
      total += 1.0;
    }
  }
  MassPoints mp;
  mp.mass.resize((long)counts.size());
  long k = 0;
  for (const auto& [id, c] : counts) {
    mp.word_ids.push_back(id);
    mp.mass(k++) = c / total;
  }
  return mp;
}

}  // namespace

double wmd_feature(const Tokens& a, const Tokens& b, const EmbeddingTable& emb) {
  const MassPoints pa = nbow_masses(a, emb);
  const MassPoints pb = nbow_masses(b, emb);
  if (pa.word_ids.empty() || pb.word_ids.empty()) return wmd_sentinel(emb);

  TransportProblem prob;
  prob.supply = pa.mass;
  prob.demand = pb.mass;
  prob.cost.resize((long)pa.word_ids.size(), (long)pb.word_ids.size());
  for (long i = 0; i < prob.cost.rows(); ++i)
    for (long j = 0; j < prob.cost.cols(); ++j)
      prob.cost(i, j) =
          (emb.vector(pa.word_ids[i]) - emb.vector(pb.word_ids[j])).norm();
  return solve_emd(prob).objective;
}

int select_sentence(const SentenceIndex& index, const HypothesisQuery& hypothesis,
                    const std::string& candidate, double penalty) {
  auto it = index.entity_positions.find(candidate);
  if (it == index.entity_positions.end())
    raise(Errc::entity_absent, candidate + " not in document");
  int best_sentence = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  int prev = -1;
  for (const auto& [s, _] : it->second) {
    if (s == prev) continue;  // one evaluation per sentence
    prev = s;
    const double score =
        word_alignment(hypothesis, index.sentences[s], penalty);
    if (score > best_score) {
      best_score = score;
      best_sentence = s;
    }
  }
  return best_sentence;
}

Tokens extract_window(const SentenceIndex& index, int center, int w) {
  const int S = (int)index.sentences.size();
  if (center < 0 || center >= S)
    throw std::invalid_argument("extract_window: bad sentence index");
  const int lo = std::max(0, center - w);
  const int hi = std::min(S - 1, center + w);
  Tokens out;
  for (int s = lo; s <= hi; ++s)
    out.insert(out.end(), index.sentences[s].begin(), index.sentences[s].end());
  return out;
}

std::array<int, 3> dependency_overlap(std::span<const DepTriple> query_deps,
                                      std::span<const DepTriple> doc_deps) {
  std::array<int, 3> c{0, 0, 0};
  for (const auto& q : query_deps) {
    for (const auto& d : doc_deps) {
      const bool s = q[0] == d[0], t = q[1] == d[1], arc = q[2] == d[2];
      if ((s && arc) || (t && arc)) ++c[0];
      if (s && t) ++c[1];
      if (s && t && arc) ++c[2];
    }
  }
  return c;
}

std::array<int, 7> frame_semantic_overlap(
    std::span<const FrameTriple> query_frames,
    std::span<const FrameTriple> doc_frames) {
  std::array<int, 7> c{};
  for (const auto& q : query_frames) {
    for (const auto& d : doc_frames) {
      const bool t = q.target == d.target;
      const bool f = q.frame == d.frame;
      const bool e = q.elements == d.elements;
      c[0] += t;
      c[1] += f;
      c[2] += e;
      c[3] += t && f;
      c[4] += t && e;
      c[5] += f && e;
      c[6] += t && f && e;
    }
  }
  return c;
}

namespace {

int first_occurrence(const Tokens& tokens, const std::string& tok) {
  const auto it = std::find(tokens.begin(), tokens.end(), tok);
  return it == tokens.end() ? -1 : (int)(it - tokens.begin());
}

// POS window around the selected sentence, over the original annotation
// records; anchor = first occurrence of the candidate in the window of
// original tokens. Returns false when the candidate cannot be anchored.
bool pos_window(const AnnotationSet& anno, int S, int center, int w,
                const std::string& candidate,
                std::vector<std::string>* tags, int* anchor) {
  const int lo = std::max(0, center - w);
  const int hi = std::min(S - 1, center + w);
  Tokens toks;
  tags->clear();
  for (int s = lo; s <= hi; ++s) {
    const auto& rec = anno.sentences[s];
    toks.insert(toks.end(), rec.tokens.begin(), rec.tokens.end());
    tags->insert(tags->end(), rec.pos.begin(), rec.pos.end());
  }
  *anchor = first_occurrence(toks, candidate);
  return *anchor >= 0;
}

}  // namespace

FeatureMatrix featurize(const QuestionInstance& q,
                        const AnnotationSet* annotations,
                        const FeatureConfig& config, const EmbeddingTable* emb,
                        bool coref) {
  if (config.needs_annotations(coref) && annotations == nullptr)
    raise(Errc::config_error,
          "feature set " + config.schema_id() + (coref ? " with coref" : "") +
              " requires annotations");
  if (config.needs_embeddings() && emb == nullptr)
    raise(Errc::config_error, "WMD requires an embedding table");

  const SentenceIndex raw = split_sentences(q.document);
  if (annotations) check_alignment(*annotations, raw);

  // Word-level features run over the coref-substituted text; POS/DEP/FS
  // stay on the original records, which the substitution would misalign.
  const SentenceIndex index = coref ? apply_coreference(raw, *annotations) : raw;
  const int S = (int)raw.sentences.size();

  const SentenceAnnotation* query_anno =
      annotations ? query_record(*annotations, S) : nullptr;
  const bool wants_query_anno = config.has(FeatureKind::Pos) ||
                                config.has(FeatureKind::Dep) ||
                                config.has(FeatureKind::FS);
  if (wants_query_anno) {
    if (!query_anno)
      raise(Errc::config_error,
            q.doc_id + ": annotation file lacks the query record");
    if (query_anno->tokens != q.query)
      raise(Errc::misaligned_annotations,
            q.doc_id + ": query record tokens differ from query");
  }

  FeatureMatrix out;
  out.qid = q.doc_id;
  out.schema_id = config.schema_id();
  out.candidates = q.candidates;
  out.values = Mat::Zero((long)q.candidates.size(), config.dim());
  out.labels = IntVec::Zero((long)q.candidates.size());

  const auto hypotheses = instantiate_candidates(q.query, q.candidates);

  for (size_t ci = 0; ci < q.candidates.size(); ++ci) {
    const std::string& cand = q.candidates[ci];
    const HypothesisQuery& hyp = hypotheses[ci];
    if (cand == q.answer) out.labels((long)ci) = 1;

    const int si = select_sentence(index, hyp, cand, config.wa_penalty);

    // Assemble values in schema order.
    long c = 0;
    for (FeatureKind k : config.enabled) {
      switch (k) {
        case FeatureKind::Freq: {
          int doc_count = 0;
          for (const auto& sent : index.sentences)
            doc_count += (int)std::count(sent.begin(), sent.end(), cand);
          const int query_count =
              (int)std::count(q.query.begin(), q.query.end(), cand);
          out.values((long)ci, c++) = doc_count;
          out.values((long)ci, c++) = query_count;
          break;
        }
        case FeatureKind::WA: {
          const Tokens window = extract_window(index, si, config.wa_window);
          out.values((long)ci, c++) =
              word_alignment(hyp, window, config.wa_penalty);
          break;
        }
        case FeatureKind::Nbow: {
          const Tokens window = extract_window(index, si, config.nbow_window);
          out.values((long)ci, c++) = nbow_similarity(hyp.tokens, window);
          break;
        }
        case FeatureKind::Wmd: {
          const Tokens window = extract_window(index, si, config.wmd_window);
          out.values((long)ci, c++) = wmd_feature(hyp.tokens, window, *emb);
          break;
        }
        case FeatureKind::Pos: {
          std::vector<std::string> sent_tags;
          int sent_anchor = -1;
          double value = -config.wa_penalty;  // sentinel: worse than any score
          if (pos_window(*annotations, S, si, config.pos_window, cand,
                         &sent_tags, &sent_anchor)) {
            value = pos_alignment(query_anno->pos, sent_tags,
                                  {hyp.candidate_pos, sent_anchor},
                                  config.wa_penalty);
          }
          out.values((long)ci, c++) = value;
          break;
        }
        case FeatureKind::Dep: {
          const auto counts = dependency_overlap(
              query_anno->deps, annotations->sentences[si].deps);
          for (int v : counts) out.values((long)ci, c++) = v;
          break;
        }
        case FeatureKind::FS: {
          const auto counts = frame_semantic_overlap(
              query_anno->frames, annotations->sentences[si].frames);
          for (int v : counts) out.values((long)ci, c++) = v;
          break;
        }
      }
    }
  }
  return out;
}

std::string to_ranking_lines(const FeatureMatrix& m) {
  std::ostringstream out;
  for (long i = 0; i < m.values.rows(); ++i) {
    out << m.labels(i) << " qid:" << m.qid;
    for (long j = 0; j < m.values.cols(); ++j)
      out << " " << (j + 1) << ":" << format_g6(m.values(i, j));
    out << " # " << m.candidates[(size_t)i] << "\n";
  }
  return out.str();
}

}  // namespace clozerank
