#pragma once

#include <stdexcept>
#include <string>

namespace rmlal {

/// Base class for every error thrown by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line the parser choked on.
class parse_error : public error {
 public:
  parse_error(const std::string& what, int line)
      : error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Input is well-formed but violates the expected schema (e.g. a label
/// named in the header file is missing from the attribute list).
class schema_error : public error {
 public:
  using error::error;
};

class empty_dataset_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

class dimension_error : public error {
 public:
  using error::error;
};

class domain_error : public error {
 public:
  using error::error;
};

class query_error : public error {
 public:
  using error::error;
};

/// A per-label linear system could not be factorized.
class solver_error : public error {
 public:
  solver_error(const std::string& what, int label, double condition_estimate)
      : error(what + " (label " + std::to_string(label) +
              ", condition estimate " + std::to_string(condition_estimate) + ")"),
        label_(label),
        condition_estimate_(condition_estimate) {}
  int label() const { return label_; }
  double condition_estimate() const { return condition_estimate_; }

 private:
  int label_;
  double condition_estimate_;
};

class divergence_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

}  // namespace rmlal
