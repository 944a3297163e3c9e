#pragma once

#include <stdexcept>
#include <string>

namespace qnoise {

// Every library failure derives from qnoise::error so callers can catch one type.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class size_error : public error {
 public:
  using error::error;
};

class index_error : public error {
 public:
  using error::error;
};

class unitarity_error : public error {
 public:
  using error::error;
};

class normalization_error : public error {
 public:
  using error::error;
};

class domain_error : public error {
 public:
  using error::error;
};

class shape_error : public error {
 public:
  using error::error;
};

class empty_input_error : public error {
 public:
  using error::error;
};

class unsupported_configuration_error : public error {
 public:
  using error::error;
};

/// Raised when the margin shrinkage factor is zero and the offset bound is undefined.
class degenerate_shrinkage_error : public error {
 public:
  using error::error;
};

class infeasible_spec_error : public error {
 public:
  using error::error;
};

/// Invalid run configuration (CLI usage error).
class config_error : public error {
 public:
  using error::error;
};

}  // namespace qnoise
