#include "clozerank/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "clozerank/error.hpp"
#include "clozerank/text_util.hpp"

namespace clozerank {

namespace {

std::vector<std::vector<std::string>> split_sections(const std::string& text) {
  std::vector<std::vector<std::string>> sections(1);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line))
      sections.emplace_back();
    else
      sections.back().push_back(line);
  }
  while (!sections.empty() && sections.back().empty()) sections.pop_back();
  return sections;
}

}  // namespace

QuestionInstance parse_question_text(const std::string& text,
                                     const std::string& source_name) {
  const auto sections = split_sections(text);
  if (sections.size() != 5)
    raise(Errc::malformed_file,
          source_name + ": expected 5 sections, found " +
              std::to_string(sections.size()));

  QuestionInstance q;
  if (sections[0].size() != 1)
    raise(Errc::malformed_file, source_name + ": URL section must be one line");
  q.doc_id = sections[0][0];

  for (const auto& line : sections[1])
    for (auto& tok : split_whitespace(line)) q.document.push_back(tok);
  if (q.document.empty())
    raise(Errc::malformed_file, source_name + ": empty document");

  for (const auto& line : sections[2])
    for (auto& tok : split_whitespace(line)) q.query.push_back(tok);
  const auto placeholders =
      std::count(q.query.begin(), q.query.end(), kPlaceholder);
  if (placeholders != 1)
    raise(Errc::missing_placeholder,
          source_name + ": query has " + std::to_string(placeholders) +
              " placeholder tokens");

  if (sections[3].size() != 1 || split_whitespace(sections[3][0]).size() != 1)
    raise(Errc::malformed_file, source_name + ": answer must be one token");
  q.answer = trim(sections[3][0]);
  if (!is_entity_token(q.answer))
    raise(Errc::malformed_file, source_name + ": answer is not an entity id");

  for (const auto& line : sections[4]) {
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      raise(Errc::malformed_file, source_name + ": bad mapping line: " + line);
    const std::string id = line.substr(0, colon);
    if (!is_entity_token(id))
      raise(Errc::malformed_file, source_name + ": bad entity id: " + id);
    if (q.entity_map.count(id))
      raise(Errc::malformed_file, source_name + ": duplicate entity id: " + id);
    q.entity_map[id] = line.substr(colon + 1);
  }

  // Candidates: mapping ids that occur in the document, first-occurrence
  // order.
  std::set<std::string> seen;
  for (const auto& tok : q.document) {
    if (q.entity_map.count(tok) && seen.insert(tok).second)
      q.candidates.push_back(tok);
  }
  if (std::find(q.candidates.begin(), q.candidates.end(), q.answer) ==
      q.candidates.end())
    raise(Errc::answer_not_candidate,
          source_name + ": answer " + q.answer + " never occurs in document");
  return q;
}

QuestionInstance parse_question_file(const std::string& path) {
  return parse_question_text(read_file(path), path);
}

std::string format_question(const QuestionInstance& q) {
  std::ostringstream out;
  out << q.doc_id << "\n\n"
      << join(q.document, " ") << "\n\n"
      << join(q.query, " ") << "\n\n"
      << q.answer << "\n\n";
  // Mapping lines in numeric entity order.
  std::vector<std::pair<long, const std::string*>> ids;
  ids.reserve(q.entity_map.size());
  for (const auto& [id, _] : q.entity_map) ids.emplace_back(entity_number(id), &id);
  std::sort(ids.begin(), ids.end());
  for (const auto& [_, id] : ids) out << *id << ":" << q.entity_map.at(*id) << "\n";
  return out.str();
}

void write_question_file(const QuestionInstance& q, const std::string& path) {
  write_file(path, format_question(q));
}

namespace {

using nlohmann::json;

const std::set<std::string> kAnnotationFields = {"tokens", "pos", "deps",
                                                 "frames", "coref_chains"};

SentenceAnnotation parse_record(const json& rec, const std::string& where) {
  if (!rec.is_object())
    raise(Errc::malformed_file, where + ": record is not an object");
  for (const auto& [key, _] : rec.items())
    if (!kAnnotationFields.count(key))
      raise(Errc::malformed_file, where + ": unknown field '" + key + "'");
  for (const auto& f : kAnnotationFields)
    if (!rec.contains(f))
      raise(Errc::malformed_file, where + ": missing field '" + f + "'");

  SentenceAnnotation s;
  s.tokens = rec.at("tokens").get<Tokens>();
  s.pos = rec.at("pos").get<std::vector<std::string>>();
  if (s.pos.size() != s.tokens.size())
    raise(Errc::length_mismatch,
          where + ": " + std::to_string(s.pos.size()) + " pos tags for " +
              std::to_string(s.tokens.size()) + " tokens");

  const std::set<std::string> vocab(s.tokens.begin(), s.tokens.end());
  std::set<DepTriple> deps;
  for (const auto& d : rec.at("deps")) {
    if (!d.is_array() || d.size() != 3)
      raise(Errc::malformed_file, where + ": dep triple must have 3 fields");
    DepTriple t{d[0].get<std::string>(), d[1].get<std::string>(),
                d[2].get<std::string>()};
    if (!vocab.count(t[0]) || !vocab.count(t[1]))
      raise(Errc::dangling_word,
            where + ": dep (" + t[0] + ", " + t[1] + ", " + t[2] +
                ") references a non-token");
    deps.insert(t);
  }
  s.deps.assign(deps.begin(), deps.end());

  std::set<FrameTriple> frames;
  for (const auto& f : rec.at("frames")) {
    if (!f.is_array() || f.size() != 3)
      raise(Errc::malformed_file, where + ": frame triple must have 3 fields");
    FrameTriple t;
    t.target = f[0].get<std::string>();
    t.frame = f[1].get<std::string>();
    for (const auto& e : f[2]) t.elements.insert(e.get<std::string>());
    if (!vocab.count(t.target))
      raise(Errc::dangling_word,
            where + ": frame target '" + t.target + "' is not a token");
    frames.insert(t);
  }
  s.frames.assign(frames.begin(), frames.end());

  for (const auto& c : rec.at("coref_chains")) {
    CorefChain chain;
    for (const auto& m : c.at("mentions")) {
      if (!m.is_array() || m.size() != 3)
        raise(Errc::malformed_file, where + ": mention must be [sent, begin, end]");
      CorefChain::Mention mention{m[0].get<int>(), m[1].get<int>(),
                                  m[2].get<int>()};
      if (mention.sentence < 0 || mention.begin < 0 ||
          mention.end <= mention.begin)
        raise(Errc::malformed_file, where + ": bad mention span");
      chain.mentions.push_back(mention);
    }
    chain.representative = c.at("representative").get<int>();
    if (chain.mentions.empty() || chain.representative < 0 ||
        chain.representative >= (int)chain.mentions.size())
      raise(Errc::malformed_file, where + ": representative index out of range");
    s.coref_chains.push_back(std::move(chain));
  }
  return s;
}

}  // namespace

AnnotationSet parse_annotations_text(const std::string& text,
                                     const std::string& source_name) {
  AnnotationSet set;
  set.doc_id = std::filesystem::path(source_name).stem().string();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      raise(Errc::malformed_file,
            source_name + ":" + std::to_string(lineno) + ": " + e.what());
    }
    set.sentences.push_back(
        parse_record(rec, source_name + ":" + std::to_string(lineno)));
  }
  return set;
}

AnnotationSet parse_annotations(const std::string& path) {
  return parse_annotations_text(read_file(path), path);
}

std::string format_annotations(const AnnotationSet& a) {
  std::ostringstream out;
  for (const auto& s : a.sentences) {
    json rec;
    rec["tokens"] = s.tokens;
    rec["pos"] = s.pos;
    rec["deps"] = json::array();
    for (const auto& d : s.deps) rec["deps"].push_back({d[0], d[1], d[2]});
    rec["frames"] = json::array();
    for (const auto& f : s.frames)
      rec["frames"].push_back({f.target, f.frame, f.elements});
    rec["coref_chains"] = json::array();
    for (const auto& c : s.coref_chains) {
      json chain;
      chain["mentions"] = json::array();
      for (const auto& m : c.mentions)
        chain["mentions"].push_back({m.sentence, m.begin, m.end});
      chain["representative"] = c.representative;
      rec["coref_chains"].push_back(chain);
    }
    out << rec.dump() << "\n";
  }
  return out.str();
}

void write_annotations(const AnnotationSet& a, const std::string& path) {
  write_file(path, format_annotations(a));
}

EmbeddingTable EmbeddingTable::from_text(const std::string& text,
                                         const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    raise(Errc::malformed_file, source_name + ": empty embedding file");
  std::istringstream header(line);
  long count = -1, dim = -1;
  if (!(header >> count >> dim) || count < 0 || dim <= 0)
    raise(Errc::malformed_file, source_name + ": bad header '" + line + "'");

  EmbeddingTable t;
  t.vectors_.resize(dim, count);
  long row = 0;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    if (row >= count)
      raise(Errc::count_mismatch,
            source_name + ": more rows than the declared " +
                std::to_string(count));
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (t.index_.count(word))
      raise(Errc::duplicate_word, source_name + ": duplicate word " + word);
    double v = 0;
    long got = 0;
    while (ls >> v) {
      if (got < dim) t.vectors_(got, row) = v;
      ++got;
    }
    if (got != dim)
      raise(Errc::dimension_mismatch,
            source_name + ": word " + word + " has " + std::to_string(got) +
                " values, expected " + std::to_string(dim));
    t.index_[word] = (int)row;
    t.words_.push_back(word);
    ++row;
  }
  if (row != count)
    raise(Errc::count_mismatch, source_name + ": declared " +
                                    std::to_string(count) + " words, found " +
                                    std::to_string(row));

  return t;
}

double EmbeddingTable::max_pairwise_distance() const {
  std::call_once(*diameter_once_, [this] {
    const long n = vectors_.cols();
    if (n < 2) return;
    const Vec sq = vectors_.colwise().squaredNorm();
    double best = 0.0;
    constexpr long block = 256;
    for (long j0 = 0; j0 < n; j0 += block) {
      const long w = std::min(block, n - j0);
      const Mat dots = vectors_.transpose() * vectors_.middleCols(j0, w);
      for (long j = 0; j < w; ++j)
        for (long i = 0; i < n; ++i) {
          const double d2 = sq(i) + sq(j0 + j) - 2.0 * dots(i, j);
          if (d2 > best) best = d2;
        }
    }
    max_pairwise_distance_ = std::sqrt(std::max(0.0, best));
  });
  return max_pairwise_distance_;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  return from_text(read_file(path), path);
}

std::optional<int> EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CorpusStats corpus_stats(const std::vector<std::string>& question_files) {
  CorpusStats st;
  std::set<std::string> docs;
  for (const auto& path : question_files) {
    const QuestionInstance q = parse_question_file(path);
    docs.insert(q.doc_id);
    st.queries += 1;
    st.max_entities = std::max(st.max_entities, q.candidates.size());
    st.total_entities += q.candidates.size();
    st.total_tokens += q.document.size();
  }
  st.documents = docs.size();
  return st;
}

std::vector<std::string> list_question_files(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  if (!fs::is_directory(dir))
    raise(Errc::io_error, dir + " is not a directory");
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".question")
      out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace clozerank
