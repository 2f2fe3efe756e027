#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dibets {

enum class Errc {
  MalformedUrl,
  EmptyInput,
  NotBimodal,
  DuplicateKeyword,
  EmptyTopicSet,
  MalformedDocument,
  DimensionMismatch,
  MalformedHeader,
  NoSubpaths,
  EmptyCandidates,
  EmptySample,
  LengthMismatch,
  MalformedRecord,
  UnknownTopic,
  EmptyCorpus,
  InvalidArgument,
  RankTooLow,
  KTooLarge,
  SingleCluster,
  MissingStage,
  ConfigInvalid,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

// All library failures are reported through this one exception type; callers
// branch on code() rather than on the dynamic type.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dibets
