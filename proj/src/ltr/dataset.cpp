#include "clozerank/ltr/dataset.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "clozerank/error.hpp"
#include "clozerank/text_util.hpp"

namespace clozerank::ltr {

int RankedGroup::gold() const {
  for (int i = 0; i < labels.size(); ++i)
    if (labels(i) == 1) return i;
  return -1;
}

std::string RankedGroup::id_of(int row) const {
  if (row >= 0 && row < (int)ids.size() && !ids[row].empty()) return ids[row];
  return std::to_string(row);
}

std::size_t RankingDataset::total_rows() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += (std::size_t)g.rows();
  return n;
}

void RankingDataset::validate() const {
  if (groups.empty()) raise(Errc::invalid_dataset, "no groups");
  const int d = dim();
  for (const auto& g : groups) {
    if (g.rows() < 2)
      raise(Errc::invalid_dataset, "group " + g.qid + " has fewer than 2 rows");
    if ((int)g.features.cols() != d)
      raise(Errc::invalid_dataset, "group " + g.qid + " has inconsistent dim");
    int pos = 0;
    for (int i = 0; i < g.labels.size(); ++i) pos += g.labels(i) == 1;
    if (pos != 1)
      raise(Errc::invalid_dataset,
            "group " + g.qid + " has " + std::to_string(pos) +
                " relevant rows, expected exactly 1");
  }
}

namespace {

struct RawRow {
  int label;
  std::string qid;
  std::map<int, double> values;  // 1-indexed
  std::string id;
};

RawRow parse_row(const std::string& line, const std::string& where) {
  RawRow row;
  std::string body = line;
  if (const auto hash = body.find('#'); hash != std::string::npos) {
    row.id = trim(body.substr(hash + 1));
    body = body.substr(0, hash);
  }
  std::istringstream in(body);
  std::string tok;
  if (!(in >> tok)) raise(Errc::malformed_file, where + ": empty row");
  try {
    row.label = std::stoi(tok);
  } catch (...) {
    raise(Errc::malformed_file, where + ": bad label '" + tok + "'");
  }
  while (in >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      raise(Errc::malformed_file, where + ": expected key:value, got '" + tok + "'");
    const std::string key = tok.substr(0, colon);
    const std::string val = tok.substr(colon + 1);
    if (key == "qid") {
      row.qid = val;
      continue;
    }
    int idx = 0;
    const auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
    if (ec != std::errc() || p != key.data() + key.size() || idx < 1)
      raise(Errc::malformed_file, where + ": bad feature index '" + key + "'");
    try {
      row.values[idx] = std::stod(val);
    } catch (...) {
      raise(Errc::malformed_file, where + ": bad value '" + val + "'");
    }
  }
  if (row.qid.empty()) raise(Errc::malformed_file, where + ": missing qid");
  return row;
}

}  // namespace

RankingDataset RankingDataset::from_text(const std::string& text,
                                         const std::string& source_name) {
  std::vector<RawRow> rows;
  int max_idx = 0;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    rows.push_back(parse_row(t, source_name + ":" + std::to_string(lineno)));
    if (!rows.back().values.empty())
      max_idx = std::max(max_idx, rows.back().values.rbegin()->first);
  }

  RankingDataset ds;
  std::map<std::string, int> qid_slot;
  for (const auto& r : rows) {
    if (!qid_slot.count(r.qid)) {
      qid_slot[r.qid] = (int)ds.groups.size();
      ds.groups.push_back({r.qid, Mat(0, max_idx), IntVec(0), {}});
    }
  }
  // Two passes keep rows in file order within each group.
  std::map<std::string, int> counts;
  for (const auto& r : rows) counts[r.qid] += 1;
  for (auto& g : ds.groups) {
    g.features.resize(counts[g.qid], max_idx);
    g.features.setZero();
    g.labels.resize(counts[g.qid]);
    g.ids.resize((size_t)counts[g.qid]);
  }
  std::map<std::string, int> cursor;
  for (const auto& r : rows) {
    RankedGroup& g = ds.groups[(size_t)qid_slot[r.qid]];
    const int i = cursor[r.qid]++;
    g.labels(i) = r.label;
    g.ids[(size_t)i] = r.id;
    for (const auto& [idx, v] : r.values) g.features(i, idx - 1) = v;
  }
  return ds;
}

RankingDataset RankingDataset::read(const std::string& path) {
  return from_text(read_file(path), path);
}

std::string RankingDataset::to_text() const {
  std::ostringstream out;
  for (const auto& g : groups) {
    for (int i = 0; i < g.rows(); ++i) {
      out << g.labels(i) << " qid:" << g.qid;
      for (int j = 0; j < g.features.cols(); ++j)
        out << " " << (j + 1) << ":" << format_g6(g.features(i, j));
      if (i < (int)g.ids.size() && !g.ids[(size_t)i].empty())
        out << " # " << g.ids[(size_t)i];
      out << "\n";
    }
  }
  return out.str();
}

void RankingDataset::write(const std::string& path) const {
  write_file(path, to_text());
}

}  // namespace clozerank::ltr
