#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wdevolve/error.hpp"

namespace wde {

enum class MwuMode { Exact, Approximate, Auto };

struct MwuResult {
    double u = 0;      // U statistic of the first sample
    double p = 1;      // two-sided
    bool exact = false;
};

/// U = #{a > b} + half the ties, over all pairs. Exact p enumerates every
/// assignment of the pooled values to the two groups (tie-aware); the
/// approximation is normal with tie-corrected variance and continuity
/// correction. Auto switches to exact when the pooled size is at most 12.
MwuResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                         MwuMode mode = MwuMode::Auto);

/// Corrected significance threshold alpha/m.
double bonferroni(double alpha, int m);

enum class Magnitude { Negligible, Small, Medium, Large };

std::string_view to_string(Magnitude m);  // "negligible" ...
std::string_view abbrev(Magnitude m);     // "(n)" ...
Magnitude magnitude_of(double delta);

struct DeltaResult {
    double delta = 0;
    Magnitude magnitude = Magnitude::Negligible;
};

/// Cliff's delta: pairwise dominance of a over b, in [-1, 1].
DeltaResult cliffs_delta(const std::vector<double>& a, const std::vector<double>& b);

struct NormalityResult {
    double statistic = 0;  // K^2
    double p = 1;
    double z_skew = 0;
    double z_kurt = 0;
};

/// D'Agostino-Pearson omnibus test. Requires n >= 20; throws below that and
/// on zero-variance samples (callers fall back to the nonparametric path).
NormalityResult normality_test(const std::vector<double>& sample);

struct BoxSummary {
    double median = 0;
    double q1 = 0;
    double q3 = 0;
    double whisker_low = 0;
    double whisker_high = 0;
    std::int64_t n = 0;
};

/// Quartiles by linear interpolation; whiskers at the most extreme points
/// within 1.5 IQR of the quartiles. Fliers beyond that are left out.
BoxSummary box_summary(std::vector<double> sample);

double median(std::vector<double> sample);

/// One inducing-vs-other comparison, Table-row shaped. The effect size is
/// only computed when the difference is significant.
struct TestResult {
    std::string metric_name;
    std::int64_t n_other = 0;
    std::int64_t n_inducing = 0;
    double median_other = 0;
    double median_inducing = 0;
    double u_statistic = 0;
    double p_value = 1;
    double alpha_corrected = 0;
    bool significant = false;
    std::optional<double> delta;
    std::optional<Magnitude> magnitude;
};

TestResult compare_samples(const std::string& metric_name, const std::vector<double>& other,
                           const std::vector<double>& inducing, double alpha_corrected,
                           MwuMode mode = MwuMode::Auto);

}  // namespace wde
