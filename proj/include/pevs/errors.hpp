#ifndef PEVS_ERRORS_HPP
#define PEVS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pevs {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct ConvergenceFailure : Error {
  explicit ConvergenceFailure(const std::string& msg) : Error(msg) {}
};

struct ParameterOutOfRange : Error {
  explicit ParameterOutOfRange(const std::string& msg) : Error(msg) {}
};

struct DegenerateSnapshot : Error {
  explicit DegenerateSnapshot(const std::string& msg) : Error(msg) {}
};

struct DegenerateData : Error {
  explicit DegenerateData(const std::string& msg) : Error(msg) {}
};

struct OptimizationFailure : Error {
  explicit OptimizationFailure(const std::string& msg) : Error(msg) {}
};

struct OutOfDomain : Error {
  explicit OutOfDomain(const std::string& msg) : Error(msg) {}
};

struct DuplicateKnots : Error {
  explicit DuplicateKnots(const std::string& msg) : Error(msg) {}
};

struct ZeroReference : Error {
  explicit ZeroReference(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct ArchiveError : Error {
  explicit ArchiveError(const std::string& msg) : Error(msg) {}
};

}  // namespace pevs

#endif
