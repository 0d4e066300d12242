#pragma once

#include <stdexcept>
#include <string>

namespace clozerank {

enum class Errc {
  io_error,
  malformed_file,
  missing_placeholder,
  answer_not_candidate,
  length_mismatch,
  dangling_word,
  dimension_mismatch,
  duplicate_word,
  count_mismatch,
  misaligned_annotations,
  infeasible_mass,
  all_out_of_vocabulary,
  entity_absent,
  unknown_candidate,
  invalid_dataset,
  schema_mismatch,
  empty_group,
  non_finite_loss,
  size_exceeds_corpus,
  version_mismatch,
  corrupt_model,
  config_error,
};

const char* errc_name(Errc c);

/// Exception carrying a structured error code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

  /// True for errors caused by bad user input (CLI maps these to exit 1).
  bool is_validation() const noexcept;

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace clozerank
