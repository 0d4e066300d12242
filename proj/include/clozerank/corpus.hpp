#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "clozerank/types.hpp"

namespace clozerank {

/// One (document, query, answer, candidates) tuple over anonymized text.
///
/// Candidates are every entity id from the mapping section that occurs in
/// the document, ordered by first occurrence in the document. This order is
/// the canonical candidate order used everywhere downstream.
struct QuestionInstance {
  std::string doc_id;  // the URL line
  Tokens document;
  Tokens query;  // contains @placeholder exactly once
  std::string answer;
  std::vector<std::string> candidates;
  std::map<std::string, std::string> entity_map;  // id -> surface string

  bool operator==(const QuestionInstance&) const = default;
};

QuestionInstance parse_question_file(const std::string& path);
QuestionInstance parse_question_text(const std::string& text,
                                     const std::string& source_name);

/// Inverse of parse_question_text: parse(format(q)) == q.
std::string format_question(const QuestionInstance& q);
void write_question_file(const QuestionInstance& q, const std::string& path);

struct CorefChain {
  struct Mention {
    int sentence;  // document sentence index
    int begin;     // token range [begin, end)
    int end;
    bool operator==(const Mention&) const = default;
  };
  std::vector<Mention> mentions;
  int representative = 0;  // index into mentions
  bool operator==(const CorefChain&) const = default;
};

struct FrameTriple {
  std::string target;
  std::string frame;
  std::set<std::string> elements;
  auto operator<=>(const FrameTriple&) const = default;
};

using DepTriple = std::array<std::string, 3>;  // (source, target, arc)

/// External-parser output for one sentence. deps and frames are sets
/// (duplicates are dropped at parse time).
struct SentenceAnnotation {
  Tokens tokens;
  std::vector<std::string> pos;  // |pos| == |tokens|
  std::vector<DepTriple> deps;
  std::vector<FrameTriple> frames;
  std::vector<CorefChain> coref_chains;  // chains whose first mention is here
  bool operator==(const SentenceAnnotation&) const = default;
};

/// Sidecar annotations for one question file: one record per document
/// sentence, in order, optionally followed by a single record annotating
/// the query. Coreference mention spans address document sentences, so a
/// chain may cross sentences; it is stored on the record of its first
/// mention's sentence.
struct AnnotationSet {
  std::string doc_id;  // file stem
  std::vector<SentenceAnnotation> sentences;
};

AnnotationSet parse_annotations(const std::string& path);
AnnotationSet parse_annotations_text(const std::string& text,
                                     const std::string& source_name);
std::string format_annotations(const AnnotationSet& a);
void write_annotations(const AnnotationSet& a, const std::string& path);

/// word -> dense vector table in the text word2vec layout.
class EmbeddingTable {
 public:
  /// Header "count dim", then one "word v1 .. vd" row per word.
  static EmbeddingTable load(const std::string& path);
  static EmbeddingTable from_text(const std::string& text,
                                  const std::string& source_name);

  int dimension() const { return (int)vectors_.rows(); }
  int size() const { return (int)vectors_.cols(); }
  std::optional<int> find(const std::string& word) const;
  /// Column view of a word's vector.
  Eigen::Ref<const Vec> vector(int id) const { return vectors_.col(id); }
  const Mat& vectors() const { return vectors_; }
  const std::string& word(int id) const { return words_[id]; }

  /// Largest pairwise Euclidean distance in the table; feature code uses
  /// 2x this value as the empty-support sentinel. Computed exactly once,
  /// on first use (O(count^2 * dim)), then cached; safe to call from
  /// concurrent readers.
  double max_pairwise_distance() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
  Mat vectors_;  // dimension x count, one column per word
  mutable std::unique_ptr<std::once_flag> diameter_once_ =
      std::make_unique<std::once_flag>();
  mutable double max_pairwise_distance_ = 0.0;
};

/// Exact corpus-level counts; averages are the stored exact ratios.
struct CorpusStats {
  std::size_t documents = 0;  // distinct doc ids
  std::size_t queries = 0;    // question files
  std::size_t max_entities = 0;
  std::size_t total_entities = 0;  // sum of candidate-set sizes
  std::size_t total_tokens = 0;    // sum of document lengths
  double avg_entities() const {
    return queries ? (double)total_entities / (double)queries : 0.0;
  }
  double avg_tokens() const {
    return queries ? (double)total_tokens / (double)queries : 0.0;
  }
  bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(const std::vector<std::string>& question_files);

/// *.question files under dir, lexicographically sorted.
std::vector<std::string> list_question_files(const std::string& dir);

}  // namespace clozerank
