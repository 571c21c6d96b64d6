#pragma once

#include <stdexcept>
#include <string>

namespace rsmt {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define RSMT_DEFINE_ERROR(Name)                               \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& msg)                     \
        : Error(std::string(#Name) + ": " + msg) {}           \
  }

// core math
RSMT_DEFINE_ERROR(DegenerateRotation);
RSMT_DEFINE_ERROR(InvalidRotation);
RSMT_DEFINE_ERROR(SkeletonMismatch);
RSMT_DEFINE_ERROR(SignalTooShort);
RSMT_DEFINE_ERROR(InvalidSpeed);

// autodiff
RSMT_DEFINE_ERROR(ShapeError);
RSMT_DEFINE_ERROR(NonScalarLoss);

// motion data
RSMT_DEFINE_ERROR(ParseError);
RSMT_DEFINE_ERROR(RetargetError);
RSMT_DEFINE_ERROR(ResampleError);
RSMT_DEFINE_ERROR(MirrorError);
RSMT_DEFINE_ERROR(SplitError);
RSMT_DEFINE_ERROR(ParameterError);

// phase / manifold / sampler
RSMT_DEFINE_ERROR(InvalidAmplitude);
RSMT_DEFINE_ERROR(EmptyDataset);
RSMT_DEFINE_ERROR(MissingLabels);
RSMT_DEFINE_ERROR(MissingPhase);
RSMT_DEFINE_ERROR(StyleClipTooShort);
RSMT_DEFINE_ERROR(ConfigError);
RSMT_DEFINE_ERROR(StateError);
RSMT_DEFINE_ERROR(CheckpointError);

// evaluation
RSMT_DEFINE_ERROR(DurationError);
RSMT_DEFINE_ERROR(InsufficientSamples);
RSMT_DEFINE_ERROR(InsufficientRepetitions);

#undef RSMT_DEFINE_ERROR

}  // namespace rsmt
