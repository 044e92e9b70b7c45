#pragma once

#include <stdexcept>
#include <string>

namespace improvkit {

// Invalid user configuration (bad flags, malformed config files).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input data could not be read or violates dataset invariants.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite values, quadrature failure, infeasible solves.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A metric is undefined on the given inputs (e.g. nobody rejected).
class EvaluationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace improvkit
