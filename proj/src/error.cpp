#include "fsavg/error.hpp"

#include <utility>

namespace fsavg {

NumericError::NumericError(const std::string& what, std::size_t step)
    : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

IterationLimitError::IterationLimitError(const std::string& what, std::size_t iterations,
                                         double residual)
    : Error(what + " after " + std::to_string(iterations) +
            " iterations, residual " + std::to_string(residual)),
      iterations_(iterations),
      residual_(residual) {}

TruncationError::TruncationError(const std::string& what, std::vector<double> partial_orbit)
    : Error(what), partial_(std::move(partial_orbit)) {}

}  // namespace fsavg
