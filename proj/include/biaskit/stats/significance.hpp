#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "biaskit/core/error.hpp"

namespace biaskit::stats {

class TestUndefined : public Undefined {
 public:
  using Undefined::Undefined;
};

struct TestResult {
  double statistic = 0;
  double p_value = 1;
  double dof = 0;
};

// rows: venues; cols: (group, rest of groups)
using Contingency2x2 = std::array<std::array<std::int64_t, 2>, 2>;

// Pearson chi-squared without continuity correction, one degree of freedom.
TestResult chi2_2x2(const Contingency2x2& table);

// Pearson chi-squared test of independence on an r x c table. All-zero
// rows and columns are dropped before the test.
TestResult chi2_independence(const std::vector<std::vector<std::int64_t>>& table);

// Welch's unequal-variance t-test, two-sided.
TestResult welch_t(std::span<const double> xs, std::span<const double> ys);

// Student's pooled-variance t-test, two-sided.
TestResult pooled_t(std::span<const double> xs, std::span<const double> ys);

enum class Stars { ns, p05, p01, p001, p0001 };

Stars star_format(double p);
std::string_view to_string(Stars s);

}  // namespace biaskit::stats
