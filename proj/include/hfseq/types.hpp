// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hfseq {

// 64-bit reals throughout: the finite-difference harnesses operate at step
// sizes near 1e-5 and need the headroom.
using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

using ConstView = Eigen::Map<const Matrix>;
using MutView = Eigen::Map<Matrix>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (bad architecture string, missing
// factor size, malformed config file, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Mismatched vector/matrix sizes between caller-provided data and a layout.
struct DimensionError : Error {
  using Error::Error;
};

// Non-finite values encountered while evaluating the network.
struct NumericError : Error {
  NumericError(const std::string& what, int timestep_ = -1)
      : Error(what), timestep(timestep_) {}
  int timestep;
};

struct IoError : Error {
  using Error::Error;
};

// Curvature operator produced a direction with non-positive curvature.
struct PsdViolationError : Error {
  PsdViolationError(const std::string& what, int iteration_)
      : Error(what), iteration(iteration_) {}
  int iteration;
};

// A brute-force oracle was asked for a problem above its cost guard.
struct CostGuardError : Error {
  using Error::Error;
};

}  // namespace hfseq
