#include "dibets/error.hpp"

namespace dibets {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedUrl: return "MalformedUrl";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NotBimodal: return "NotBimodal";
    case Errc::DuplicateKeyword: return "DuplicateKeyword";
    case Errc::EmptyTopicSet: return "EmptyTopicSet";
    case Errc::MalformedDocument: return "MalformedDocument";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::NoSubpaths: return "NoSubpaths";
    case Errc::EmptyCandidates: return "EmptyCandidates";
    case Errc::EmptySample: return "EmptySample";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::UnknownTopic: return "UnknownTopic";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::RankTooLow: return "RankTooLow";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::SingleCluster: return "SingleCluster";
    case Errc::MissingStage: return "MissingStage";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dibets
