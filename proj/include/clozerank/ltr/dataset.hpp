#pragma once

#include <string>
#include <vector>

#include "clozerank/types.hpp"

namespace clozerank::ltr {

/// One query group: the candidate rows of a single question.
struct RankedGroup {
  std::string qid;
  Mat features;                   // candidates x dim
  IntVec labels;                  // exactly one 1 in a valid training group
  std::vector<std::string> ids;   // entity ids from the '#' comments

  int rows() const { return (int)features.rows(); }
  /// Index of the relevance-1 row; -1 if none.
  int gold() const;
  std::string id_of(int row) const;
};

struct RankingDataset {
  std::vector<RankedGroup> groups;
  std::string schema_id;  // empty when no manifest was present

  int dim() const { return groups.empty() ? 0 : (int)groups[0].features.cols(); }
  std::size_t total_rows() const;

  /// Training invariants: >= 2 candidates per group, exactly one positive
  /// label, consistent dimensionality. Throws Errc::invalid_dataset.
  void validate() const;

  /// Ranking text format reader; `#`-prefixed lines are skipped, trailing
  /// `# <entity>` comments populate ids. Groups follow first appearance of
  /// each qid; rows keep file order.
  static RankingDataset read(const std::string& path);
  static RankingDataset from_text(const std::string& text,
                                  const std::string& source_name);
  std::string to_text() const;
  void write(const std::string& path) const;
};

}  // namespace clozerank::ltr
