#pragma once

#include <stdexcept>
#include <string>

namespace cloze {

enum class Err {
  // input / format problems (CLI exit code 2)
  IoError,
  MalformedFile,
  BadEntityMapping,
  BadSentenceFile,
  BadParseFile,
  BadPosFile,
  BadEmbeddingFile,
  BadModelFile,
  BadConfig,
  UnknownGroup,
  UnknownCategoryToken,

  // semantic validation failures (CLI exit code 3)
  MissingPlaceholder,
  DuplicatePlaceholder,
  AnswerNotInPassage,
  EmptyCandidateSet,
  EmptyCorpus,
  EmptyTrainingSet,
  NoGoldCandidate,
  InfeasibleSpec,
  DimensionMismatch,
  ShapeMismatch,
  EmptyUnmaskedSet,
  NonScalarOutput,
  EmptyPassage,
  EmptyQuestion,
  AllMasked,
  AnswerNotCandidate,
  VocabMismatch,
  MissingParse,
  KeyMismatch,
  CategorySetMismatch,
};

class ClozeError : public std::runtime_error {
 public:
  ClozeError(Err kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Err kind() const { return kind_; }

 private:
  Err kind_;
};

[[noreturn]] inline void fail(Err kind, const std::string& what) {
  throw ClozeError(kind, what);
}

inline int exit_code_for(Err kind) {
  switch (kind) {
    case Err::IoError:
    case Err::MalformedFile:
    case Err::BadEntityMapping:
    case Err::BadSentenceFile:
    case Err::BadParseFile:
    case Err::BadPosFile:
    case Err::BadEmbeddingFile:
    case Err::BadModelFile:
    case Err::BadConfig:
    case Err::UnknownGroup:
    case Err::UnknownCategoryToken:
      return 2;
    default:
      return 3;
  }
}

}  // namespace cloze
