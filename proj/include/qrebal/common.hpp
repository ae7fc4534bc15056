#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qrebal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Trading days per year used for every annualisation.
inline constexpr double kTradingDaysPerYear = 252.0;

// Raised when a Sharpe-style ratio has a zero denominator.
class UndefinedRatio : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

}  // namespace qrebal
