#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "apifk/predictor/model.hpp"

namespace gradcheck {

// Six conv layers and three FC layers sized for finite differences:
// l0 = 24, 4-character alphabet, frame 3, hidden 5, three labels.
apifk::predictor::ConvNetModel miniature_model(std::uint64_t seed);
std::vector<apifk::predictor::Example> miniature_batch(const apifk::predictor::ConvNetModel& model,
                                                       std::uint64_t seed);

struct Result {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst_relative_error = 0.0;
};

// Central differences with step h on `coordinates` randomly sampled
// parameters. A coordinate passes when |a - n| <= tol * max(|a|, |n|), or
// when both magnitudes are below 1e-8 (pure rounding noise).
Result run(const apifk::predictor::ConvNetModel& model,
           const std::vector<apifk::predictor::Example>& batch, apifk::predictor::Mode mode,
           std::size_t coordinates, double h, double tol, std::uint64_t seed);

}  // namespace gradcheck
