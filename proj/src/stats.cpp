#include "wdevolve/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace wde {

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// 2U of the first sample: twice the pairwise wins plus the ties. Integer by
/// construction, which is what the exact distribution is indexed by.
std::int64_t two_u(const std::vector<double>& a, const std::vector<double>& b) {
    std::int64_t v = 0;
    for (double x : a) {
        for (double y : b) {
            if (x > y) v += 2;
            else if (x == y) v += 1;
        }
    }
    return v;
}

/// Distribution of 2U over all C(n, n_a) group assignments of the pooled
/// sample, as counts indexed by 2U. Ties are handled by walking the pooled
/// tie groups: picking j of a group's g values for sample a beats every
/// smaller value already assigned to b and half-ties with the g-j left over.
std::vector<double> exact_two_u_counts(std::vector<double> pooled, std::size_t n_a) {
    std::sort(pooled.begin(), pooled.end());
    std::vector<std::size_t> groups;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        groups.push_back(j - i);
        i = j;
    }

    const std::size_t n = pooled.size();
    const std::size_t n_b = n - n_a;
    const std::size_t max_two_u = 2 * n_a * n_b;
    // Partial assignments may park more than n_b values in the second group
    // for a while, pushing intermediate 2U sums past 2*n_a*n_b; the true
    // ceiling is 2*used*(placed-used) <= n*n/2.
    const std::size_t cap = n * n / 2;
    std::vector<std::vector<double>> dp(n_a + 1, std::vector<double>(cap + 1, 0.0));
    dp[0][0] = 1.0;

    std::size_t before = 0;  // pooled values in earlier groups
    for (std::size_t g : groups) {
        auto next = std::vector<std::vector<double>>(n_a + 1, std::vector<double>(cap + 1, 0.0));
        for (std::size_t used = 0; used <= std::min(n_a, before); ++used) {
            for (std::size_t tu = 0; tu <= cap; ++tu) {
                double ways = dp[used][tu];
                if (ways == 0.0) continue;
                double choose = 1.0;
                for (std::size_t j = 0; j <= std::min(g, n_a - used); ++j) {
                    if (j > 0) choose = choose * static_cast<double>(g - j + 1) / static_cast<double>(j);
                    std::size_t b_before = before - used;
                    std::size_t gain = 2 * j * b_before + j * (g - j);
                    next[used + j][tu + gain] += ways * choose;
                }
            }
        }
        dp = std::move(next);
        before += g;
    }
    dp[n_a].resize(max_two_u + 1);  // complete assignments never exceed it
    return dp[n_a];
}

}  // namespace

MwuResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                         MwuMode mode) {
    if (a.empty() || b.empty()) throw Error("Mann-Whitney U needs two non-empty samples");
    const std::size_t n_a = a.size(), n_b = b.size(), n = n_a + n_b;

    MwuResult result;
    std::int64_t tu = two_u(a, b);
    result.u = static_cast<double>(tu) / 2.0;

    bool exact = mode == MwuMode::Exact || (mode == MwuMode::Auto && n <= 12);
    if (exact) {
        std::vector<double> pooled = a;
        pooled.insert(pooled.end(), b.begin(), b.end());
        auto counts = exact_two_u_counts(std::move(pooled), n_a);
        double total = 0, low = 0, high = 0;
        for (std::size_t v = 0; v < counts.size(); ++v) {
            total += counts[v];
            if (static_cast<std::int64_t>(v) <= tu) low += counts[v];
            if (static_cast<std::int64_t>(v) >= tu) high += counts[v];
        }
        result.p = std::min(1.0, 2.0 * std::min(low, high) / total);
        result.exact = true;
        return result;
    }

    std::map<double, std::size_t> tie_counts;
    for (double x : a) tie_counts[x]++;
    for (double x : b) tie_counts[x]++;
    double tie_sum = 0;
    for (const auto& [_, t] : tie_counts) {
        double td = static_cast<double>(t);
        tie_sum += td * td * td - td;
    }
    double mu = static_cast<double>(n_a) * static_cast<double>(n_b) / 2.0;
    double variance = (static_cast<double>(n_a) * static_cast<double>(n_b) / 12.0) *
                      (static_cast<double>(n + 1) -
                       tie_sum / (static_cast<double>(n) * static_cast<double>(n - 1)));
    if (variance <= 0) {
        result.p = 1.0;
        return result;
    }
    double d = std::abs(result.u - mu) - 0.5;  // continuity correction
    if (d < 0) d = 0;
    result.p = std::min(1.0, 2.0 * normal_sf(d / std::sqrt(variance)));
    return result;
}

double bonferroni(double alpha, int m) {
    if (!(alpha > 0 && alpha < 1)) throw Error("alpha must lie in (0, 1)");
    if (m < 1) throw Error("the number of tests must be positive");
    return alpha / static_cast<double>(m);
}

std::string_view to_string(Magnitude m) {
    switch (m) {
        case Magnitude::Negligible: return "negligible";
        case Magnitude::Small: return "small";
        case Magnitude::Medium: return "medium";
        case Magnitude::Large: return "large";
    }
    return "negligible";
}

std::string_view abbrev(Magnitude m) {
    switch (m) {
        case Magnitude::Negligible: return "(n)";
        case Magnitude::Small: return "(s)";
        case Magnitude::Medium: return "(m)";
        case Magnitude::Large: return "(l)";
    }
    return "(n)";
}

Magnitude magnitude_of(double delta) {
    double d = std::abs(delta);
    if (d < 0.147) return Magnitude::Negligible;
    if (d < 0.33) return Magnitude::Small;
    if (d < 0.474) return Magnitude::Medium;
    return Magnitude::Large;
}

DeltaResult cliffs_delta(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw Error("Cliff's delta needs two non-empty samples");
    std::int64_t gt = 0, lt = 0;
    for (double x : a) {
        for (double y : b) {
            if (x > y) ++gt;
            else if (x < y) ++lt;
        }
    }
    DeltaResult r;
    r.delta = static_cast<double>(gt - lt) /
              (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    r.magnitude = magnitude_of(r.delta);
    return r;
}

NormalityResult normality_test(const std::vector<double>& sample) {
    const std::size_t sz = sample.size();
    if (sz < 20) {
        throw Error("normality test needs at least 20 observations, got " + std::to_string(sz));
    }
    const double n = static_cast<double>(sz);
    double mean = 0;
    for (double x : sample) mean += x;
    mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : sample) {
        double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 <= 0) throw Error("normality test is undefined for a zero-variance sample");

    double g1 = m3 / std::pow(m2, 1.5);
    double b2 = m4 / (m2 * m2);  // not excess kurtosis: the transform targets b2 itself

    // Skewness (D'Agostino).
    double y = g1 * std::sqrt((n + 1) * (n + 3) / (6 * (n - 2)));
    double beta2 = 3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) /
                   ((n - 2) * (n + 5) * (n + 7) * (n + 9));
    double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
    double delta = 1.0 / std::sqrt(std::log(std::sqrt(w2)));
    double alpha = std::sqrt(2.0 / (w2 - 1.0));
    double ya = y / alpha;
    double z_skew = delta * std::log(ya + std::sqrt(ya * ya + 1.0));

    // Kurtosis (Anscombe & Glynn).
    double e = 3.0 * (n - 1) / (n + 1);
    double var = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
    double x = (b2 - e) / std::sqrt(var);
    double beta = 6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) *
                  std::sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)));
    double a6 = 6.0 + 8.0 / beta * (2.0 / beta + std::sqrt(1.0 + 4.0 / (beta * beta)));
    double z_kurt = ((1.0 - 2.0 / (9.0 * a6)) -
                     std::cbrt((1.0 - 2.0 / a6) / (1.0 + x * std::sqrt(2.0 / (a6 - 4.0))))) /
                    std::sqrt(2.0 / (9.0 * a6));

    NormalityResult out;
    out.z_skew = z_skew;
    out.z_kurt = z_kurt;
    out.statistic = z_skew * z_skew + z_kurt * z_kurt;
    out.p = std::exp(-out.statistic / 2.0);  // chi-square survival, 2 dof
    return out;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
    double h = static_cast<double>(v.size() - 1) * p;
    std::size_t lo = static_cast<std::size_t>(h);
    double frac = h - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

BoxSummary box_summary(std::vector<double> sample) {
    if (sample.empty()) throw Error("box summary of an empty sample");
    std::sort(sample.begin(), sample.end());
    BoxSummary box;
    box.n = static_cast<std::int64_t>(sample.size());
    box.median = quantile_sorted(sample, 0.5);
    box.q1 = quantile_sorted(sample, 0.25);
    box.q3 = quantile_sorted(sample, 0.75);
    double iqr = box.q3 - box.q1;
    double lo_fence = box.q1 - 1.5 * iqr;
    double hi_fence = box.q3 + 1.5 * iqr;
    box.whisker_low = *std::find_if(sample.begin(), sample.end(),
                                    [&](double x) { return x >= lo_fence; });
    box.whisker_high = *std::find_if(sample.rbegin(), sample.rend(),
                                     [&](double x) { return x <= hi_fence; });
    return box;
}

double median(std::vector<double> sample) {
    if (sample.empty()) throw Error("median of an empty sample");
    std::sort(sample.begin(), sample.end());
    return quantile_sorted(sample, 0.5);
}

TestResult compare_samples(const std::string& metric_name, const std::vector<double>& other,
                           const std::vector<double>& inducing, double alpha_corrected,
                           MwuMode mode) {
    TestResult r;
    r.metric_name = metric_name;
    r.n_other = static_cast<std::int64_t>(other.size());
    r.n_inducing = static_cast<std::int64_t>(inducing.size());
    r.alpha_corrected = alpha_corrected;
    r.median_other = median(other);
    r.median_inducing = median(inducing);
    MwuResult mwu = mann_whitney_u(inducing, other, mode);
    r.u_statistic = mwu.u;
    r.p_value = mwu.p;
    r.significant = r.p_value < alpha_corrected;
    if (r.significant) {
        DeltaResult d = cliffs_delta(inducing, other);
        r.delta = d.delta;
        r.magnitude = d.magnitude;
    }
    return r;
}

}  // namespace wde
