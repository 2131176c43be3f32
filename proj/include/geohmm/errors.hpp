#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geohmm {

// Malformed files, out-of-range symbols, mismatched dimensions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The sequence has zero probability (or density) under the model.
class ImpossibleSequence : public std::runtime_error {
 public:
  explicit ImpossibleSequence(std::size_t step)
      : std::runtime_error("sequence impossible under model at step " +
                           std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace geohmm

namespace geohmm {

// Zero-variance sample configurations for which a likelihood is unbounded.
class DegenerateSample : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace geohmm
