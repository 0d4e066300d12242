#include "clozerank/preprocess.hpp"

#include <algorithm>
#include <set>

#include "clozerank/error.hpp"
#include "clozerank/text_util.hpp"

namespace clozerank {

namespace {

const std::set<std::string> kPronouns = {"he",  "she", "it",   "they", "him",
                                         "her", "them", "his", "hers", "its",
                                         "their"};

bool is_pronoun(const std::string& tok) {
  return kPronouns.count(lowercase(tok)) > 0;
}

bool is_terminator(const std::string& tok) {
  return tok == "." || tok == "!" || tok == "?";
}

}  // namespace

Tokens SentenceIndex::flatten() const {
  Tokens out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

SentenceIndex SentenceIndex::build(std::vector<Tokens> sentences) {
  SentenceIndex idx;
  idx.sentences = std::move(sentences);
  for (int s = 0; s < (int)idx.sentences.size(); ++s)
    for (int t = 0; t < (int)idx.sentences[s].size(); ++t)
      if (is_entity_token(idx.sentences[s][t]))
        idx.entity_positions[idx.sentences[s][t]].emplace_back(s, t);
  return idx;
}

SentenceIndex split_sentences(const Tokens& document) {
  if (document.empty())
    throw std::invalid_argument("split_sentences: empty document");
  std::vector<Tokens> sentences;
  Tokens cur;
  for (const auto& tok : document) {
    cur.push_back(tok);
    if (is_terminator(tok)) {
      sentences.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) sentences.push_back(std::move(cur));
  return SentenceIndex::build(std::move(sentences));
}

void check_alignment(const AnnotationSet& annotations,
                     const SentenceIndex& document) {
  const size_t S = document.sentences.size();
  if (annotations.sentences.size() != S && annotations.sentences.size() != S + 1)
    raise(Errc::misaligned_annotations,
          annotations.doc_id + ": " + std::to_string(annotations.sentences.size()) +
              " records for " + std::to_string(S) + " sentences");
  for (size_t s = 0; s < S; ++s) {
    if (annotations.sentences[s].tokens != document.sentences[s])
      raise(Errc::misaligned_annotations,
            annotations.doc_id + ": record " + std::to_string(s) +
                " tokens differ from document sentence");
  }
  for (size_t s = 0; s < S; ++s) {
    for (const auto& chain : annotations.sentences[s].coref_chains)
      for (const auto& m : chain.mentions) {
        if (m.sentence >= (int)S ||
            m.end > (int)document.sentences[m.sentence].size())
          raise(Errc::misaligned_annotations,
                annotations.doc_id + ": mention span out of range");
      }
  }
}

const SentenceAnnotation* query_record(const AnnotationSet& annotations,
                                       std::size_t document_sentences) {
  if (annotations.sentences.size() == document_sentences + 1)
    return &annotations.sentences.back();
  return nullptr;
}

SentenceIndex apply_coreference(const SentenceIndex& document,
                                const AnnotationSet& annotations) {
  check_alignment(annotations, document);
  const size_t S = document.sentences.size();

  // One replacement per position; first chain in document order wins.
  struct Replacement {
    int begin;
    Tokens tokens;
  };
  std::vector<std::vector<Replacement>> per_sentence(S);
  std::set<std::pair<int, int>> claimed;

  for (size_t s = 0; s < S; ++s) {
    for (const auto& chain : annotations.sentences[s].coref_chains) {
      const auto& rep = chain.mentions[chain.representative];
      Tokens rep_tokens(document.sentences[rep.sentence].begin() + rep.begin,
                        document.sentences[rep.sentence].begin() + rep.end);
      for (int mi = 0; mi < (int)chain.mentions.size(); ++mi) {
        if (mi == chain.representative) continue;
        const auto& m = chain.mentions[mi];
        if (m.end - m.begin != 1) continue;  // single-token mentions only
        const std::string& tok = document.sentences[m.sentence][m.begin];
        if (!is_pronoun(tok)) continue;
        if (!claimed.insert({m.sentence, m.begin}).second) continue;
        per_sentence[m.sentence].push_back({m.begin, rep_tokens});
      }
    }
  }

  std::vector<Tokens> out = document.sentences;
  for (size_t s = 0; s < S; ++s) {
    auto& reps = per_sentence[s];
    std::sort(reps.begin(), reps.end(),
              [](const Replacement& x, const Replacement& y) {
                return x.begin > y.begin;  // splice right-to-left
              });
    for (const auto& r : reps) {
      auto& toks = out[s];
      toks.erase(toks.begin() + r.begin);
      toks.insert(toks.begin() + r.begin, r.tokens.begin(), r.tokens.end());
    }
  }
  return SentenceIndex::build(std::move(out));
}

std::vector<HypothesisQuery> instantiate_candidates(
    const Tokens& query, const std::vector<std::string>& candidates) {
  const auto n = std::count(query.begin(), query.end(), kPlaceholder);
  if (n != 1)
    raise(Errc::missing_placeholder,
          "query has " + std::to_string(n) + " placeholder tokens");
  const int pos = (int)(std::find(query.begin(), query.end(), kPlaceholder) -
                        query.begin());
  std::vector<HypothesisQuery> out;
  out.reserve(candidates.size());
  for (const auto& cand : candidates) {
    HypothesisQuery h{cand, query, pos};
    h.tokens[pos] = cand;
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace clozerank
