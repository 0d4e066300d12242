#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "clozerank/corpus.hpp"
#include "clozerank/preprocess.hpp"
#include "clozerank/types.hpp"

namespace clozerank {

enum class FeatureKind { Freq, WA, Nbow, Wmd, Pos, Dep, FS };

const char* feature_name(FeatureKind k);
int feature_width(FeatureKind k);
std::optional<FeatureKind> feature_from_name(const std::string& name);

/// Active feature set plus the alignment/window knobs.
struct FeatureConfig {
  // Kept in canonical order {Freq, WA, Nbow, Wmd, Pos, Dep, FS}.
  std::vector<FeatureKind> enabled = {FeatureKind::WA, FeatureKind::Nbow,
                                      FeatureKind::Wmd, FeatureKind::FS};
  double wa_penalty = 10.0;
  int wa_window = 0;
  int pos_window = 0;
  int nbow_window = 1;
  int wmd_window = 1;

  bool has(FeatureKind k) const;
  FeatureConfig& set_enabled(std::vector<FeatureKind> kinds);
  /// Comma-separated names, e.g. "WA,NBOW,WMD,FS".
  static std::vector<FeatureKind> parse_feature_list(const std::string& csv);

  int dim() const;
  std::string schema_id() const;  // names joined by '+'
  std::vector<std::string> column_names() const;
  bool needs_annotations(bool coref) const;
  bool needs_embeddings() const;
};

/// Per-question feature block: one row per candidate, canonical order.
struct FeatureMatrix {
  std::string qid;
  std::string schema_id;
  std::vector<std::string> candidates;
  Mat values;      // |candidates| x dim
  IntVec labels;   // 1 for the gold answer, else 0
};

// --- individual feature operations -----------------------------------------

/// Occurrence counts of candidate in the document and the (raw) query.
std::pair<int, int> frequency(const QuestionInstance& q,
                              const std::string& candidate);

/// Alignment score <= 0. Both sequences are indexed relative to the
/// candidate anchor (hypothesis: hyp_anchor; sentence: first occurrence of
/// candidate). Every other hypothesis token adds the smallest relative
/// index gap to a matching sentence token, or `penalty` when unmatched;
/// the total is negated and averaged over the hypothesis length.
double word_alignment(const Tokens& hypothesis, int hyp_anchor,
                      const Tokens& sentence, const std::string& candidate,
                      double penalty);
double word_alignment(const HypothesisQuery& hypothesis, const Tokens& sentence,
                      double penalty);

/// Same arithmetic as word_alignment over POS tags, with explicit anchors
/// (hypothesis tag index, sentence tag index).
double pos_alignment(const std::vector<std::string>& hyp_pos,
                     const std::vector<std::string>& sent_pos,
                     std::pair<int, int> anchors, double penalty);

/// Relative term frequencies over `vocabulary`; entries sum to 1.
/// Throws Errc::all_out_of_vocabulary when nothing is in vocabulary.
Eigen::SparseVector<double> nbow_vector(
    const Tokens& tokens, const std::unordered_map<std::string, int>& vocabulary);

/// Cosine of the two nBOW vectors over the union vocabulary, in [0, 1];
/// 0 when either side is empty.
double nbow_similarity(const Tokens& a, const Tokens& b);

/// Exact WMD between the two texts under Euclidean embedding costs, after
/// dropping out-of-vocabulary words and renormalizing. Returns the
/// empty-support sentinel (2x the table diameter) when either side loses
/// all words.
double wmd_feature(const Tokens& a, const Tokens& b, const EmbeddingTable& emb);
double wmd_sentinel(const EmbeddingTable& emb);

/// Sentence of `index` containing the candidate with the best
/// word_alignment score against the hypothesis; ties take the smaller
/// index. Throws Errc::entity_absent when no sentence contains it.
int select_sentence(const SentenceIndex& index, const HypothesisQuery& hypothesis,
                    const std::string& candidate, double penalty);

/// Sentences [center-w, center+w] concatenated, clipped at the bounds.
Tokens extract_window(const SentenceIndex& index, int center, int w);

/// Dependency-overlap counts over the cross product of the two triple sets:
/// (1) source+arc or target+arc match, (2) source+target, (3) all three.
std::array<int, 3> dependency_overlap(std::span<const DepTriple> query_deps,
                                      std::span<const DepTriple> doc_deps);

/// Frame-semantic overlap counts for the seven predicates over (target,
/// frame, element-set) triples: t, f, e, t&f, t&e, f&e, t&f&e.
std::array<int, 7> frame_semantic_overlap(std::span<const FrameTriple> query_frames,
                                          std::span<const FrameTriple> doc_frames);

/// Full per-question extraction. `annotations` may be nullptr unless POS,
/// DEP or FS is enabled or coref is on; `emb` may be nullptr unless WMD is
/// enabled. A candidate-level failure fills that candidate's entries with
/// the feature's sentinel instead of aborting the question.
FeatureMatrix featurize(const QuestionInstance& q,
                        const AnnotationSet* annotations,
                        const FeatureConfig& config, const EmbeddingTable* emb,
                        bool coref);

/// Ranking text format: `<label> qid:<qid> <k>:<value>... # <entity>`,
/// features 1-indexed, values "%.6g", single-space separated.
std::string to_ranking_lines(const FeatureMatrix& m);

}  // namespace clozerank
