#include "clozerank/error.hpp"

namespace clozerank {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::io_error: return "IoError";
    case Errc::malformed_file: return "MalformedFile";
    case Errc::missing_placeholder: return "MissingPlaceholder";
    case Errc::answer_not_candidate: return "AnswerNotCandidate";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::dangling_word: return "DanglingWord";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::duplicate_word: return "DuplicateWord";
    case Errc::count_mismatch: return "CountMismatch";
    case Errc::misaligned_annotations: return "MisalignedAnnotations";
    case Errc::infeasible_mass: return "InfeasibleMass";
    case Errc::all_out_of_vocabulary: return "AllOutOfVocabulary";
    case Errc::entity_absent: return "EntityAbsent";
    case Errc::unknown_candidate: return "UnknownCandidate";
    case Errc::invalid_dataset: return "InvalidDataset";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::empty_group: return "EmptyGroup";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::size_exceeds_corpus: return "SizeExceedsCorpus";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::corrupt_model: return "CorruptModel";
    case Errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

bool Error::is_validation() const noexcept {
  switch (code_) {
    case Errc::io_error:
    case Errc::malformed_file:
    case Errc::missing_placeholder:
    case Errc::answer_not_candidate:
    case Errc::length_mismatch:
    case Errc::dangling_word:
    case Errc::dimension_mismatch:
    case Errc::duplicate_word:
    case Errc::count_mismatch:
    case Errc::misaligned_annotations:
    case Errc::invalid_dataset:
    case Errc::schema_mismatch:
    case Errc::version_mismatch:
    case Errc::corrupt_model:
    case Errc::size_exceeds_corpus:
    case Errc::config_error:
      return true;
    default:
      return false;
  }
}

}  // namespace clozerank
