#pragma once

#include <vector>

namespace robreg {

double median(std::vector<double> values);

/// Least-squares slope of log(y) against log(x); inputs must be positive.
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace robreg
