#pragma once

#include <stdexcept>
#include <string>

namespace kds {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NotSubextremal : Error {
  explicit NotSubextremal(const std::string& what) : Error(what) {}
};

struct OutOfDomain : Error {
  explicit OutOfDomain(const std::string& what) : Error(what) {}
};

struct ResonantFrequency : Error {
  explicit ResonantFrequency(const std::string& what) : Error(what) {}
};

struct SeriesDiverged : Error {
  explicit SeriesDiverged(const std::string& what) : Error(what) {}
};

struct StepSizeUnderflow : Error {
  explicit StepSizeUnderflow(const std::string& what) : Error(what) {}
};

struct NotConverged : Error {
  explicit NotConverged(const std::string& what) : Error(what) {}
};

struct InvalidMode : Error {
  explicit InvalidMode(const std::string& what) : Error(what) {}
};

struct EmptySet : Error {
  explicit EmptySet(const std::string& what) : Error(what) {}
};

struct GridMismatch : Error {
  explicit GridMismatch(const std::string& what) : Error(what) {}
};

struct StructureViolation : Error {
  explicit StructureViolation(const std::string& what) : Error(what) {}
};

struct UnknownRegime : Error {
  explicit UnknownRegime(const std::string& what) : Error(what) {}
};

struct PolarSingularity : Error {
  explicit PolarSingularity(const std::string& what) : Error(what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace kds
