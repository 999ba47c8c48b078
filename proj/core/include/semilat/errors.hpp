#pragma once

#include <stdexcept>
#include <string>

namespace semilat {

/// Base class for all semilat errors. Scenario runners map subclasses to
/// process exit codes (config errors -> 1, failed hypotheses -> 2,
/// numerical divergence -> 3).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SpaceMismatch : public Error {
public:
  using Error::Error;
};

class NegativeTime : public Error {
public:
  using Error::Error;
};

class SingularResolvent : public Error {
public:
  using Error::Error;
};

class DivergentSeries : public Error {
public:
  using Error::Error;
};

class DivergentIteration : public Error {
public:
  using Error::Error;
};

class NotRescaled : public Error {
public:
  using Error::Error;
};

class NonDecayingTail : public Error {
public:
  using Error::Error;
};

class EmbeddingMismatch : public Error {
public:
  using Error::Error;
};

/// Carries the name of the theorem hypothesis that failed, e.g.
/// "spectral radius 1.3 >= 1 at lambda=0".
class HypothesisFailed : public Error {
public:
  HypothesisFailed(std::string which, const std::string& detail)
      : Error(detail), which_(std::move(which)) {}
  const std::string& which() const { return which_; }

private:
  std::string which_;
};

class DominationViolated : public Error {
public:
  using Error::Error;
};

class InconsistentRepresentations : public Error {
public:
  using Error::Error;
};

class SingularBVP : public Error {
public:
  using Error::Error;
};

class BadAlpha : public Error {
public:
  using Error::Error;
};

class NotPositiveOperator : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace semilat
