#pragma once

#include <stdexcept>
#include <string>

namespace socnet {

// Base class for every error the library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Normalization target has no positive mass.
struct AllZeroError : Error {
  explicit AllZeroError(const std::string& what) : Error(what) {}
};

struct DimensionMismatchError : Error {
  explicit DimensionMismatchError(const std::string& what) : Error(what) {}
};

// Risk level outside (0, 1].
struct BadAlphaError : Error {
  explicit BadAlphaError(const std::string& what) : Error(what) {}
};

// Iterative solver hit its iteration cap before reaching tolerance.
struct NoConvergenceError : Error {
  explicit NoConvergenceError(const std::string& what) : Error(what) {}
};

// Conditioning on an action that has zero probability under the model.
struct ImpossibleActionError : Error {
  explicit ImpossibleActionError(const std::string& what) : Error(what) {}
};

// Operation restricted to two-state models.
struct UnsupportedDimensionError : Error {
  explicit UnsupportedDimensionError(const std::string& what) : Error(what) {}
};

struct NoEdgesError : Error {
  explicit NoEdgesError(const std::string& what) : Error(what) {}
};

struct DisconnectedError : Error {
  explicit DisconnectedError(const std::string& what) : Error(what) {}
};

// Particle weights collapsed to numerical zero.
struct DegenerateWeightsError : Error {
  explicit DegenerateWeightsError(const std::string& what) : Error(what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Ratio whose denominator sums to zero.
struct ZeroDenominatorError : Error {
  explicit ZeroDenominatorError(const std::string& what) : Error(what) {}
};

}  // namespace socnet
