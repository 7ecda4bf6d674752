#pragma once

#include <stdexcept>

namespace ergokit {

/// Dimension or invariant violation in a numeric container.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A tabular operation received a non-tabular (parametric) policy.
struct UnsupportedPolicy : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Stationary distribution requested for a multichain matrix.
struct NonUniqueStationary : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Too few usable points to fit anything.
struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite values propagated out of a smoother.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Learner state became non-finite.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Geometric-mean window queried while not full or with non-positive entries.
struct UndefinedGrowth : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Experiment configuration failed validation.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A referenced environment/algorithm name is not registered.
struct UnknownComponent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A CSV input does not match the documented schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ergokit
