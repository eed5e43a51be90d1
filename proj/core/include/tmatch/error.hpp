#pragma once

#include <stdexcept>
#include <string>

namespace tmatch {

/// Base class for all tmatch errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegeneratePoint : public Error { public: using Error::Error; };
class SingularMatrix : public Error { public: using Error::Error; };
class RankDeficient : public Error { public: using Error::Error; };
class InsufficientMatches : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };
class InvalidRange : public Error { public: using Error::Error; };
class ImageTooSmall : public Error { public: using Error::Error; };
class EmptyMask : public Error { public: using Error::Error; };
class BadStride : public Error { public: using Error::Error; };
class WindowOutOfRange : public Error { public: using Error::Error; };
class DimMismatch : public Error { public: using Error::Error; };
class EmptyKeys : public Error { public: using Error::Error; };
class DegenerateSet : public Error { public: using Error::Error; };
class ZeroDenominator : public Error { public: using Error::Error; };
class DegenerateVector : public Error { public: using Error::Error; };
class TooFewMatches : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };
class EmptyGroundTruth : public Error { public: using Error::Error; };
class PipelineDegenerate : public Error { public: using Error::Error; };
class NoMasks : public Error { public: using Error::Error; };
class IoFailure : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace tmatch
