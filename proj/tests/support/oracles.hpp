#pragma once

// Reference implementations used only by tests. Each one recomputes a
// quantity the slow, obvious way so it shares no code path with the library.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "wordswap/wordswap.hpp"

namespace oracle {

using wordswap::Corpus;
using wordswap::Instance;
using wordswap::Label;

inline bool has(const std::vector<std::string>& toks, const std::string& w) {
    for (const auto& t : toks)
        if (t == w) return true;
    return false;
}

/// Ids of instances with a in the premise and b in the hypothesis, by linear scan.
inline std::vector<std::string> scan(const Corpus& c, const std::string& a, const std::string& b) {
    std::vector<std::string> ids;
    for (const auto& inst : c.instances())
        if (has(inst.premise, a) && has(inst.hypothesis, b)) ids.push_back(inst.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

/// n(ad - bc)^2 / ((a+b)(c+d)(a+c)(b+d))
inline double pearson_2x2(double a, double b, double c, double d) {
    double n = a + b + c + d;
    double num = n * (a * d - b * c) * (a * d - b * c);
    return num / ((a + b) * (c + d) * (a + c) * (b + d));
}

/// Chi-square upper tail by boost's incomplete gamma.
inline double chi2_sf_gamma(double x, int k) { return boost::math::gamma_q(0.5 * k, 0.5 * x); }

/// Chi-square upper tail by integrating the density over [x, inf).
inline double chi2_sf_integral(double x, int k) {
    const double half = 0.5 * k;
    const double logc = -half * std::log(2.0) - std::lgamma(half);
    auto pdf = [&](double t) {
        if (t <= 0) return 0.0;
        return std::exp(logc + (half - 1.0) * std::log(t) - 0.5 * t);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double u) { return pdf(x + u); });
}

inline __int128 choose(int n, int k) {
    if (k < 0 || k > n) return 0;
    __int128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Two-sided Fisher p by listing every table with the observed margins and
/// comparing integer numerators of the hypergeometric probabilities.
inline double fisher_enumerate(int a, int b, int c, int d) {
    const int r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
    auto weight = [&](int x) { return choose(r1, x) * choose(r2, c1 - x); };
    const __int128 obs = weight(a);
    __int128 tail = 0, all = 0;
    for (int x = 0; x <= c1; ++x) {
        __int128 w = weight(x);
        all += w;
        if (w <= obs) tail += w;
    }
    (void)n;
    return static_cast<double>(static_cast<long double>(tail) / static_cast<long double>(all));
}

/// Exact McNemar p by visiting all 2^(b+c) equally likely splits of the
/// discordant pairs.
inline double mcnemar_bruteforce(int b, int c) {
    const int n = b + c;
    const int k = std::min(b, c);
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
        if (__builtin_popcountll(mask) <= k) ++hits;
    double p = 2.0 * static_cast<double>(hits) / std::ldexp(1.0, n);
    return std::min(1.0, p);
}

/// Random corpus over a small vocabulary plus the given pair words, so that
/// pair words land on either side, sometimes twice, sometimes both sides.
inline Corpus synthetic_corpus(std::size_t n, const std::vector<wordswap::WordPair>& pairs,
                               std::uint64_t seed) {
    static const std::vector<std::string> filler = {"a",     "the",  "man",   "woman", "dog",
                                                    "is",    "on",   "at",    "park",  "runs",
                                                    "sits",  "near", "an",    "old",   "house",
                                                    "child", "with", "green", "ball",  "street"};
    std::vector<std::string> pair_words;
    for (const auto& p : pairs) {
        pair_words.push_back(p.w1);
        pair_words.push_back(p.w2);
    }
    std::mt19937_64 rng(seed);
    auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
    auto sentence = [&]() {
        std::size_t len = 3 + rng() % 6;
        std::string s;
        for (std::size_t i = 0; i < len; ++i) {
            if (!s.empty()) s += ' ';
            s += (rng() % 4 == 0) ? pick(pair_words) : pick(filler);
        }
        return s;
    };
    Corpus c;
    for (std::size_t i = 0; i < n; ++i) {
        std::string id = "s" + std::to_string(i);
        auto gold = static_cast<Label>(rng() % 3);
        c.add(wordswap::make_instance(id, sentence(), sentence(), gold));
    }
    return c;
}

/// Corpus where instance i carries pair i % pairs.size() cleanly: w1 once in
/// the premise, w2 once in the hypothesis, neither on the other side.
inline Corpus clean_pair_corpus(std::size_t n, const std::vector<wordswap::WordPair>& pairs,
                                std::uint64_t seed, Label gold = Label::contradiction) {
    static const std::vector<std::string> nouns = {"man", "woman", "dog", "child", "girl", "boy"};
    static const std::vector<std::string> tails = {"in the park", "on a street", "near the house",
                                                   "at the beach", "with a ball"};
    std::mt19937_64 rng(seed);
    Corpus c;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = pairs[i % pairs.size()];
        auto noun = nouns[rng() % nouns.size()];
        auto tail = tails[rng() % tails.size()];
        c.add(wordswap::make_instance("c" + std::to_string(i),
                                      "The " + p.w1 + " " + noun + " stands " + tail + ".",
                                      "The " + noun + " is " + p.w2 + " " + tail + ".", gold));
    }
    return c;
}

}  // namespace oracle
