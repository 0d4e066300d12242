#include "clozerank/synth.hpp"

#include <filesystem>
#include <random>
#include <sstream>

#include "clozerank/error.hpp"
#include "clozerank/text_util.hpp"

namespace clozerank {

ltr::RankingDataset synth_features(const SynthFeatureSpec& spec) {
  if (spec.groups < 1 || spec.candidates < 2 || spec.features < 1)
    raise(Errc::config_error, "bad synthetic feature spec");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_gold(0, spec.candidates - 1);

  ltr::RankingDataset ds;
  ds.schema_id = "synthetic" + std::to_string(spec.features);
  for (int g = 0; g < spec.groups; ++g) {
    ltr::RankedGroup group;
    group.qid = std::to_string(g + 1);
    group.features.resize(spec.candidates, spec.features);
    group.labels = IntVec::Zero(spec.candidates);
    const int gold = pick_gold(rng);
    group.labels(gold) = 1;
    for (int i = 0; i < spec.candidates; ++i) {
      group.ids.push_back("@entity" + std::to_string(i));
      for (int f = 0; f < spec.features; ++f) {
        if (f == 0 && spec.label_feature) {
          double v = spec.separability * (i == gold ? 1.0 : 0.0);
          if (spec.noise > 0) v += spec.noise * gauss(rng);
          group.features(i, f) = v;
        } else {
          group.features(i, f) = gauss(rng);
        }
      }
    }
    ds.groups.push_back(std::move(group));
  }
  return ds;
}

namespace {

struct Lexicon {
  std::vector<std::string> verbs, nouns, advs;
  std::vector<std::string> entities;

  static Lexicon build(int entity_count) {
    Lexicon lex;
    for (int i = 0; i < 12; ++i) lex.verbs.push_back("vb" + std::to_string(i));
    for (int i = 0; i < 24; ++i) lex.nouns.push_back("nn" + std::to_string(i));
    for (int i = 0; i < 6; ++i) lex.advs.push_back("rb" + std::to_string(i));
    for (int i = 0; i < entity_count; ++i)
      lex.entities.push_back("@entity" + std::to_string(i));
    return lex;
  }

  // Nouns are paired (2k, 2k+1) as synonyms with nearby embeddings.
  const std::string& synonym(const std::string& noun) const {
    for (size_t i = 0; i < nouns.size(); ++i)
      if (nouns[i] == noun) return nouns[i ^ 1];
    return noun;
  }
};

std::string tag_of(const std::string& tok) {
  if (tok == "." ) return ".";
  if (tok == kPlaceholder || is_entity_token(tok)) return "NNP";
  if (tok.rfind("vb", 0) == 0) return "VB";
  if (tok.rfind("nn", 0) == 0) return "NN";
  if (tok.rfind("rb", 0) == 0) return "RB";
  return "PRP";
}

SentenceAnnotation annotate_sentence(const Tokens& toks) {
  SentenceAnnotation a;
  a.tokens = toks;
  for (const auto& t : toks) a.pos.push_back(tag_of(t));
  // Clause structure: the verb governs its left neighbor (subject) and
  // every following content word.
  int verb = -1;
  for (int i = 0; i < (int)toks.size(); ++i)
    if (tag_of(toks[(size_t)i]) == "VB") verb = i;
  if (verb > 0) {
    a.deps.push_back({toks[(size_t)verb], toks[(size_t)verb - 1], "nsubj"});
    for (int i = verb + 1; i < (int)toks.size(); ++i) {
      const std::string tag = tag_of(toks[(size_t)i]);
      if (tag == "NN" || tag == "NNP")
        a.deps.push_back({toks[(size_t)verb], toks[(size_t)i], "dobj"});
      else if (tag == "RB")
        a.deps.push_back({toks[(size_t)verb], toks[(size_t)i], "advmod"});
    }
    const std::string& v = toks[(size_t)verb];
    const int vid = std::stoi(v.substr(2));
    a.frames.push_back({v, "FRAME" + std::to_string(vid),
                        {"Agent", "Theme" + std::to_string(vid % 3)}});
  }
  return a;
}

struct GeneratedQuestion {
  QuestionInstance q;
  AnnotationSet anno;
};

GeneratedQuestion generate_question(const SynthCorpusSpec& spec,
                                    const Lexicon& lex, const std::string& split,
                                    int number, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_verb(0, (int)lex.verbs.size() - 1);
  std::uniform_int_distribution<int> pick_noun(0, (int)lex.nouns.size() - 1);
  std::uniform_int_distribution<int> pick_adv(0, (int)lex.advs.size() - 1);
  std::uniform_int_distribution<int> coin(0, 1);

  const int S = std::max(spec.sentences, 2);
  const int E = std::min((int)lex.entities.size(), S);

  GeneratedQuestion out;
  std::vector<Tokens> sentences;
  std::vector<int> entity_of_sentence;
  for (int s = 0; s < S; ++s) {
    const int e = s % E;
    Tokens sent{lex.entities[(size_t)e], lex.verbs[(size_t)pick_verb(rng)],
                lex.nouns[(size_t)pick_noun(rng)]};
    if (coin(rng)) sent.push_back(lex.advs[(size_t)pick_adv(rng)]);
    sent.push_back(".");
    sentences.push_back(sent);
    entity_of_sentence.push_back(e);
  }

  std::uniform_int_distribution<int> pick_sentence(0, S - 1);
  const int qs = pick_sentence(rng);
  const int answer = entity_of_sentence[(size_t)qs];

  // Query: the chosen sentence with the entity blanked; half the time the
  // noun is swapped for its synonym so surface match alone is not enough.
  Tokens query = sentences[(size_t)qs];
  for (auto& tok : query) {
    if (tok == lex.entities[(size_t)answer]) tok = kPlaceholder;
    else if (tag_of(tok) == "NN" && coin(rng)) tok = lex.synonym(tok);
  }

  // Pronoun follow-up covered by a coreference chain.
  const bool with_pronoun = number % 3 == 0;
  if (with_pronoun) {
    Tokens sent{"he", lex.verbs[(size_t)pick_verb(rng)],
                lex.nouns[(size_t)pick_noun(rng)], "."};
    sentences.push_back(sent);
  }

  QuestionInstance& q = out.q;
  q.doc_id = "http://synth.invalid/" + split + "/" + std::to_string(number);
  for (const auto& s : sentences)
    q.document.insert(q.document.end(), s.begin(), s.end());
  q.query = query;
  q.answer = lex.entities[(size_t)answer];
  for (int e = 0; e < E; ++e)
    q.entity_map[lex.entities[(size_t)e]] = "Entity " + std::to_string(e);
  // One mapping entry that never occurs in the document: candidate
  // derivation must drop it.
  q.entity_map["@entity97"] = "Unused";
  std::set<std::string> seen;
  for (const auto& tok : q.document)
    if (q.entity_map.count(tok) && seen.insert(tok).second)
      q.candidates.push_back(tok);

  AnnotationSet& anno = out.anno;
  anno.doc_id = "q" + std::to_string(number);
  for (const auto& s : sentences) anno.sentences.push_back(annotate_sentence(s));
  if (with_pronoun) {
    CorefChain chain;
    chain.mentions.push_back({qs, 0, 1});              // the entity mention
    chain.mentions.push_back({(int)sentences.size() - 1, 0, 1});  // "he"
    chain.representative = 0;
    anno.sentences[(size_t)qs].coref_chains.push_back(chain);
  }
  anno.sentences.push_back(annotate_sentence(query));  // trailing query record
  return out;
}

LoadedSplit generate_split(const SynthCorpusSpec& spec, const Lexicon& lex,
                           const std::string& split, int count,
                           std::uint64_t salt) {
  LoadedSplit out;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(spec.seed * 2654435761ULL + salt * 40503ULL +
                        (std::uint64_t)i);
    GeneratedQuestion gq = generate_question(spec, lex, split, i, rng);
    out.questions.push_back(std::move(gq.q));
    out.annotations.push_back(std::move(gq.anno));
  }
  return out;
}

std::string embeddings_text(const SynthCorpusSpec& spec, const Lexicon& lex) {
  std::vector<std::string> words;
  for (const auto& v : lex.verbs) words.push_back(v);
  for (const auto& n : lex.nouns) words.push_back(n);
  for (const auto& a : lex.advs) words.push_back(a);
  for (const auto& e : lex.entities) words.push_back(e);
  words.push_back(".");
  words.push_back("he");

  std::mt19937_64 rng(spec.seed ^ 0xe5b3f00dULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = spec.embedding_dim;
  std::map<std::string, Vec> table;
  for (const auto& w : words) {
    Vec v(d);
    for (int k = 0; k < d; ++k) v(k) = gauss(rng);
    v.normalize();
    table[w] = v;
  }
  // Pull synonym pairs together so WMD sees them as near-equivalents.
  for (size_t i = 0; i + 1 < lex.nouns.size(); i += 2) {
    Vec v = table[lex.nouns[i]];
    for (int k = 0; k < d; ++k) v(k) += 0.05 * gauss(rng);
    v.normalize();
    table[lex.nouns[i + 1]] = v;
  }

  std::ostringstream out;
  out << table.size() << " " << d << "\n";
  for (const auto& [w, v] : table) {
    out << w;
    for (int k = 0; k < d; ++k) out << " " << format_g6(v(k));
    out << "\n";
  }
  return out.str();
}

}  // namespace

Corpus make_synth_corpus(const SynthCorpusSpec& spec) {
  const Lexicon lex = Lexicon::build(spec.entities);
  Corpus corpus;
  corpus.train = generate_split(spec, lex, "training", spec.train_questions, 1);
  corpus.valid = generate_split(spec, lex, "validation", spec.valid_questions, 2);
  corpus.test = generate_split(spec, lex, "test", spec.test_questions, 3);
  corpus.embeddings =
      EmbeddingTable::from_text(embeddings_text(spec, lex), "synthetic");
  return corpus;
}

void write_synth_corpus(const SynthCorpusSpec& spec, const std::string& dir) {
  namespace fs = std::filesystem;
  const Lexicon lex = Lexicon::build(spec.entities);

  const std::vector<std::pair<std::string, int>> splits = {
      {"training", spec.train_questions},
      {"validation", spec.valid_questions},
      {"test", spec.test_questions}};
  std::uint64_t salt = 1;
  for (const auto& [name, count] : splits) {
    const fs::path qdir = fs::path(dir) / name;
    const fs::path adir = fs::path(dir) / "annotations" / name;
    fs::create_directories(qdir);
    fs::create_directories(adir);
    const LoadedSplit split = generate_split(spec, lex, name, count, salt++);
    for (int i = 0; i < (int)split.questions.size(); ++i) {
      char stem[16];
      std::snprintf(stem, sizeof(stem), "q%04d", i);
      write_question_file(split.questions[(size_t)i],
                          (qdir / (std::string(stem) + ".question")).string());
      write_annotations(split.annotations[(size_t)i],
                        (adir / (std::string(stem) + ".anno")).string());
    }
  }
  write_file((fs::path(dir) / "embeddings.txt").string(),
             embeddings_text(spec, lex));
}

}  // namespace clozerank
