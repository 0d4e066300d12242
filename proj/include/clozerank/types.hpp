#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace clozerank {

using Tokens = std::vector<std::string>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntVec = Eigen::VectorXi;

inline constexpr const char* kPlaceholder = "@placeholder";

/// Matches `@entity<N>` with a non-empty digit suffix.
bool is_entity_token(const std::string& tok);

/// Numeric suffix of an entity id, -1 if not an entity token.
long entity_number(const std::string& tok);

}  // namespace clozerank
