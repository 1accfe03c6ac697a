#pragma once

// Categorical statistics: chi-square tail via the regularized incomplete
// gamma function, Pearson tests with optional Yates correction, Fisher's
// exact test, McNemar's test and Bonferroni control.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wordswap/util.hpp"

namespace wordswap::stats {

namespace detail {

inline constexpr double kEps = 1e-16;
inline constexpr double kTiny = 1e-300;
inline constexpr int kMaxIter = 100000;

// P(a, x) by its power series; converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by its continued fraction (modified Lentz); for x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x) for a > 0, x >= 0.
inline double gamma_q(double a, double x) {
    if (!(a > 0.0)) throw Error("domain", "gamma_q: a must be positive");
    if (!(x >= 0.0)) throw Error("domain", "gamma_q: x must be non-negative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return std::clamp(1.0 - detail::gamma_p_series(a, x), 0.0, 1.0);
    return std::clamp(detail::gamma_q_fraction(a, x), 0.0, 1.0);
}

/// Upper tail P(X >= x) of a chi-square variable with `dof` degrees of freedom.
inline double chi2_sf(double x, int dof) {
    if (dof <= 0) throw Error("domain", "chi2_sf: dof must be positive, got " + std::to_string(dof));
    if (!(x >= 0.0)) throw Error("domain", "chi2_sf: statistic must be non-negative");
    return gamma_q(0.5 * dof, 0.5 * x);
}

/// r x c table of non-negative counts.
class ContingencyTable {
public:
    ContingencyTable() = default;
    ContingencyTable(std::vector<std::string> row_labels, std::vector<std::string> col_labels)
        : rows_(std::move(row_labels)),
          cols_(std::move(col_labels)),
          counts_(rows_.size() * cols_.size(), 0) {}

    ContingencyTable(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                     const std::vector<std::vector<std::int64_t>>& counts)
        : ContingencyTable(std::move(row_labels), std::move(col_labels)) {
        if (counts.size() != rows_.size()) throw Error("shape", "row count mismatch");
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            if (counts[r].size() != cols_.size()) throw Error("shape", "column count mismatch");
            for (std::size_t c = 0; c < cols_.size(); ++c) {
                if (counts[r][c] < 0) throw Error("domain", "negative count");
                at(r, c) = counts[r][c];
            }
        }
    }

    /// Unlabelled convenience constructor.
    static ContingencyTable of(const std::vector<std::vector<std::int64_t>>& counts) {
        std::vector<std::string> rl, cl;
        for (std::size_t i = 0; i < counts.size(); ++i) rl.push_back("r" + std::to_string(i));
        for (std::size_t j = 0; j < (counts.empty() ? 0 : counts[0].size()); ++j)
            cl.push_back("c" + std::to_string(j));
        return ContingencyTable(rl, cl, counts);
    }

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_.size(); }
    const std::vector<std::string>& row_labels() const { return rows_; }
    const std::vector<std::string>& col_labels() const { return cols_; }

    std::int64_t& at(std::size_t r, std::size_t c) { return counts_[r * cols_.size() + c]; }
    std::int64_t at(std::size_t r, std::size_t c) const { return counts_[r * cols_.size() + c]; }

    std::int64_t row_total(std::size_t r) const {
        std::int64_t s = 0;
        for (std::size_t c = 0; c < cols(); ++c) s += at(r, c);
        return s;
    }
    std::int64_t col_total(std::size_t c) const {
        std::int64_t s = 0;
        for (std::size_t r = 0; r < rows(); ++r) s += at(r, c);
        return s;
    }
    std::int64_t total() const {
        std::int64_t s = 0;
        for (auto v : counts_) s += v;
        return s;
    }

    std::vector<std::vector<std::int64_t>> matrix() const {
        std::vector<std::vector<std::int64_t>> m(rows(), std::vector<std::int64_t>(cols()));
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t c = 0; c < cols(); ++c) m[r][c] = at(r, c);
        return m;
    }

    ContingencyTable transposed() const {
        ContingencyTable t(cols_, rows_);
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t c = 0; c < cols(); ++c) t.at(c, r) = at(r, c);
        return t;
    }

    /// Fewer than two rows or columns with a nonzero marginal.
    bool degenerate() const {
        std::size_t nr = 0, nc = 0;
        for (std::size_t r = 0; r < rows(); ++r) nr += row_total(r) > 0;
        for (std::size_t c = 0; c < cols(); ++c) nc += col_total(c) > 0;
        return nr < 2 || nc < 2;
    }

    bool operator==(const ContingencyTable&) const = default;

private:
    std::vector<std::string> rows_;
    std::vector<std::string> cols_;
    std::vector<std::int64_t> counts_;
};

enum class Method { pearson, pearson_yates, fisher_exact, mcnemar_cc, mcnemar_exact };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::pearson: return "pearson";
        case Method::pearson_yates: return "pearson-yates";
        case Method::fisher_exact: return "fisher-exact";
        case Method::mcnemar_cc: return "mcnemar-cc";
        case Method::mcnemar_exact: return "mcnemar-exact";
    }
    return "?";
}

struct TestResult {
    Method method = Method::pearson;
    std::optional<double> statistic;
    std::optional<int> dof;
    double p_value = 1.0;
    std::vector<std::string> warnings;
    /// Which selection rule chose the method; empty when called directly.
    std::string rule;
};

inline nlohmann::json to_json(const TestResult& r) {
    nlohmann::json j = {{"method", to_string(r.method)},
                        {"statistic", nullptr},
                        {"dof", nullptr},
                        {"p_value", r.p_value},
                        {"warnings", r.warnings},
                        {"rule", r.rule}};
    if (r.statistic) j["statistic"] = *r.statistic;
    if (r.dof) j["dof"] = *r.dof;
    return j;
}

/// Pearson chi-square. Zero-marginal rows and columns are dropped first (with
/// a warning); Yates' correction is only defined for 2x2 tables.
inline TestResult pearson_chi2(const ContingencyTable& table, bool yates = false) {
    if (yates && (table.rows() != 2 || table.cols() != 2))
        throw Error("domain", "Yates correction requires a 2x2 table");
    TestResult res;
    res.method = yates ? Method::pearson_yates : Method::pearson;

    std::vector<std::size_t> keep_r, keep_c;
    for (std::size_t r = 0; r < table.rows(); ++r)
        if (table.row_total(r) > 0) keep_r.push_back(r);
        else res.warnings.push_back("dropped empty row '" + table.row_labels()[r] + "'");
    for (std::size_t c = 0; c < table.cols(); ++c)
        if (table.col_total(c) > 0) keep_c.push_back(c);
        else res.warnings.push_back("dropped empty column '" + table.col_labels()[c] + "'");
    if (keep_r.size() < 2 || keep_c.size() < 2)
        throw Error("degenerate_table",
                    "table needs at least 2 nonzero rows and columns (got " +
                        std::to_string(keep_r.size()) + "x" + std::to_string(keep_c.size()) + ")");

    const double n = static_cast<double>(table.total());
    double stat = 0.0;
    std::size_t low = 0;
    for (auto r : keep_r) {
        for (auto c : keep_c) {
            double e = static_cast<double>(table.row_total(r)) *
                       static_cast<double>(table.col_total(c)) / n;
            if (e < 5.0) ++low;
            double dev = std::fabs(static_cast<double>(table.at(r, c)) - e);
            if (yates) dev -= std::min(0.5, dev);
            stat += dev * dev / e;
        }
    }
    if (low > 0)
        res.warnings.push_back(std::to_string(low) + " cell(s) with expected count below 5");
    res.statistic = stat;
    res.dof = static_cast<int>((keep_r.size() - 1) * (keep_c.size() - 1));
    res.p_value = chi2_sf(stat, *res.dof);
    return res;
}

/// Two-sided Fisher exact test: total probability of all tables (same
/// margins) no more likely than the observed one.
inline TestResult fisher_exact(const ContingencyTable& table) {
    if (table.rows() != 2 || table.cols() != 2) throw Error("domain", "Fisher test requires 2x2");
    const std::int64_t a = table.at(0, 0);
    const std::int64_t r1 = table.row_total(0), r2 = table.row_total(1);
    const std::int64_t c1 = table.col_total(0), c2 = table.col_total(1);
    const std::int64_t n = r1 + r2;
    if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0)
        throw Error("degenerate_table", "Fisher test undefined with a zero margin");

    const std::int64_t lo = std::max<std::int64_t>(0, r1 + c1 - n);
    const std::int64_t hi = std::min(r1, c1);
    // Hypergeometric weights relative to the mode, via the pmf ratio recurrence.
    const std::int64_t mode = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor(static_cast<double>((r1 + 1) * (c1 + 1)) /
                                             static_cast<double>(n + 2))),
        lo, hi);
    std::vector<double> w(static_cast<std::size_t>(hi - lo + 1), 0.0);
    auto idx = [&](std::int64_t x) { return static_cast<std::size_t>(x - lo); };
    w[idx(mode)] = 1.0;
    for (std::int64_t x = mode; x < hi; ++x) {
        double ratio = static_cast<double>((r1 - x) * (c1 - x)) /
                       static_cast<double>((x + 1) * (n - r1 - c1 + x + 1));
        w[idx(x + 1)] = w[idx(x)] * ratio;
    }
    for (std::int64_t x = mode; x > lo; --x) {
        double ratio = static_cast<double>(x * (n - r1 - c1 + x)) /
                       static_cast<double>((r1 - x + 1) * (c1 - x + 1));
        w[idx(x - 1)] = w[idx(x)] * ratio;
    }
    double total = 0.0;
    for (double v : w) total += v;
    const double cutoff = w[idx(a)] * (1.0 + 1e-12);
    double tail = 0.0;
    for (double v : w)
        if (v <= cutoff) tail += v;

    TestResult res;
    res.method = Method::fisher_exact;
    res.p_value = std::clamp(tail / total, 0.0, 1.0);
    return res;
}

inline constexpr std::int64_t kDefaultMcNemarExactBelow = 25;

/// McNemar's test on discordant pair counts b (control correct, transformed
/// wrong) and c (the reverse). Exact binomial when b + c < exact_threshold.
inline TestResult mcnemar(std::int64_t b, std::int64_t c,
                          std::int64_t exact_threshold = kDefaultMcNemarExactBelow) {
    if (b < 0 || c < 0) throw Error("domain", "McNemar counts must be non-negative");
    const std::int64_t n = b + c;
    if (n == 0) throw Error("degenerate_table", "McNemar test undefined without discordant pairs");
    TestResult res;
    if (n < exact_threshold) {
        res.method = Method::mcnemar_exact;
        const std::int64_t k = std::min(b, c);
        double pmf = std::ldexp(1.0, -static_cast<int>(n));
        double cdf = 0.0;
        for (std::int64_t i = 0; i <= k; ++i) {
            cdf += pmf;
            pmf *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        }
        res.p_value = std::min(1.0, 2.0 * cdf);
        return res;
    }
    res.method = Method::mcnemar_cc;
    double d = std::fabs(static_cast<double>(b - c)) - 1.0;
    res.statistic = d * d / static_cast<double>(n);
    res.dof = 1;
    res.p_value = chi2_sf(*res.statistic, 1);
    return res;
}

inline double bonferroni(double alpha_family, int m) {
    if (!(alpha_family > 0.0 && alpha_family <= 1.0))
        throw Error("domain", "family alpha must lie in (0, 1]");
    if (m < 1) throw Error("domain", "number of tests must be positive");
    return alpha_family / m;
}

struct SelectionRules {
    double fisher_expected_below = 5.0;
    std::int64_t fisher_max_total = 1000;
    double yates_expected_below = 10.0;
};

inline double min_expected(const ContingencyTable& t) {
    double n = static_cast<double>(t.total());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c)
            m = std::min(m, static_cast<double>(t.row_total(r)) *
                                static_cast<double>(t.col_total(c)) / n);
    return m;
}

/// Small-sample method choice. 2x2: Fisher when any expected count is small
/// and the table is not too large, Yates when an expected count is below the
/// Yates bound, plain Pearson otherwise. r x c: always Pearson.
inline TestResult independence_test(const ContingencyTable& table, const SelectionRules& rules = {}) {
    if (table.rows() == 2 && table.cols() == 2 && !table.degenerate()) {
        double e = min_expected(table);
        char buf[160];
        if (e < rules.fisher_expected_below && table.total() <= rules.fisher_max_total) {
            auto res = fisher_exact(table);
            std::snprintf(buf, sizeof buf, "fisher: min expected %.3g < %g and n=%lld <= %lld", e,
                          rules.fisher_expected_below, static_cast<long long>(table.total()),
                          static_cast<long long>(rules.fisher_max_total));
            res.rule = buf;
            return res;
        }
        if (e < rules.yates_expected_below) {
            auto res = pearson_chi2(table, true);
            std::snprintf(buf, sizeof buf, "yates: min expected %.3g < %g", e,
                          rules.yates_expected_below);
            res.rule = buf;
            return res;
        }
        auto res = pearson_chi2(table, false);
        std::snprintf(buf, sizeof buf, "pearson: min expected %.3g >= %g", e,
                      rules.yates_expected_below);
        res.rule = buf;
        return res;
    }
    auto res = pearson_chi2(table, false);
    res.rule = "pearson: r x c table";
    return res;
}

}  // namespace wordswap::stats
