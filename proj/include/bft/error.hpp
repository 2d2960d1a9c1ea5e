#pragma once

#include <stdexcept>
#include <string>

namespace bft {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invalid argument values (non-finite input, nonpositive scale, eps <= 0, ...)
struct parameter_error : error {
  using error::error;
};

// data unusable for the requested computation
struct degenerate_data_error : error {
  using error::error;
};
struct insufficient_data_error : error {
  using error::error;
};

// mismatched chain shapes handed to a diagnostic
struct shape_error : error {
  using error::error;
};

// density estimation preconditions violated
struct estimation_error : error {
  using error::error;
};

// inconsistent configuration (e.g. prior identity mismatch in Savage-Dickey)
struct config_error : error {
  using error::error;
};

// numerical routine failed to converge
struct numeric_error : error {
  using error::error;
};

// sampler could not find a finite starting point
struct init_error : error {
  using error::error;
};

// malformed input file
struct parse_error : error {
  using error::error;
};

// malformed command line
struct usage_error : error {
  using error::error;
};

}  // namespace bft
