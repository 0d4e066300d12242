#pragma once

#include <map>
#include <utility>
#include <vector>

#include "clozerank/corpus.hpp"
#include "clozerank/types.hpp"

namespace clozerank {

/// Document split into sentences, with every entity occurrence indexed.
struct SentenceIndex {
  std::vector<Tokens> sentences;
  // entity id -> (sentence, token) positions, in document order
  std::map<std::string, std::vector<std::pair<int, int>>> entity_positions;

  Tokens flatten() const;
  static SentenceIndex build(std::vector<Tokens> sentences);
};

/// Split after sentence-final ".", "!" or "?" tokens; a trailing fragment
/// without a terminator forms the last sentence.
SentenceIndex split_sentences(const Tokens& document);

/// Replace every single-token pronoun mention of a coreference chain with
/// the chain's representative mention (document side only). Entity tokens
/// and the placeholder are never touched; the sentence count is preserved.
/// Throws Errc::misaligned_annotations when the annotation records do not
/// line up with the document sentences.
SentenceIndex apply_coreference(const SentenceIndex& document,
                                const AnnotationSet& annotations);

/// Query with the placeholder filled by one candidate.
struct HypothesisQuery {
  std::string candidate;
  Tokens tokens;
  int candidate_pos = 0;  // former placeholder position
};

std::vector<HypothesisQuery> instantiate_candidates(
    const Tokens& query, const std::vector<std::string>& candidates);

/// True when the annotation records line up with the document sentences:
/// one record per sentence with identical tokens, plus at most one trailing
/// query record. Mention spans must stay in range.
void check_alignment(const AnnotationSet& annotations,
                     const SentenceIndex& document);

/// The trailing query record, or nullptr when the set has exactly one
/// record per document sentence.
const SentenceAnnotation* query_record(const AnnotationSet& annotations,
                                       std::size_t document_sentences);

}  // namespace clozerank
