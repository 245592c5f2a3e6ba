#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rsf/error.hpp"

namespace rsf::analysis {

/// Dense contingency table of two labelings, rows indexed by the distinct
/// values of `a` (ascending), columns by those of `b`.
struct Contingency {
    std::vector<std::vector<long long>> counts;
    std::vector<long long> row_sums;
    std::vector<long long> col_sums;
    long long n = 0;
};

inline Contingency contingency(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("contingency: labelings have lengths " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()));
    }
    std::map<int, std::size_t> ra;
    std::map<int, std::size_t> rb;
    for (int v : a) ra.emplace(v, 0);
    for (int v : b) rb.emplace(v, 0);
    std::size_t k = 0;
    for (auto& [_, idx] : ra) idx = k++;
    k = 0;
    for (auto& [_, idx] : rb) idx = k++;

    Contingency t;
    t.n = static_cast<long long>(a.size());
    t.counts.assign(ra.size(), std::vector<long long>(rb.size(), 0));
    t.row_sums.assign(ra.size(), 0);
    t.col_sums.assign(rb.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t r = ra[a[i]];
        const std::size_t c = rb[b[i]];
        ++t.counts[r][c];
        ++t.row_sums[r];
        ++t.col_sums[c];
    }
    return t;
}

inline double entropy_of_counts(std::span<const long long> counts, long long n) {
    double h = 0.0;
    for (long long c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

inline double mutual_information(const Contingency& t) {
    const double n = static_cast<double>(t.n);
    double mi = 0.0;
    for (std::size_t i = 0; i < t.counts.size(); ++i) {
        for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
            const long long nij = t.counts[i][j];
            if (nij == 0) continue;
            const double v = static_cast<double>(nij);
            mi += v / n * std::log(n * v / (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
        }
    }
    return std::max(mi, 0.0);
}

/**
 * @brief Expected mutual information under the hypergeometric model of
 * random labelings with the observed marginals.
 *
 * EMI = sum_i sum_j sum_{nij} nij/N * ln(N nij / (a_i b_j)) * P(nij | a_i, b_j, N),
 * with P evaluated in log space through lgamma.
 */
inline double expected_mutual_information(const Contingency& t) {
    const long long n = t.n;
    const double nd = static_cast<double>(n);
    const double lg_n = std::lgamma(nd + 1.0);
    double emi = 0.0;
    for (long long ai : t.row_sums) {
        for (long long bj : t.col_sums) {
            const long long lo = std::max<long long>(1, ai + bj - n);
            const long long hi = std::min(ai, bj);
            const double a = static_cast<double>(ai);
            const double b = static_cast<double>(bj);
            const double fixed = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) + std::lgamma(nd - a + 1.0) +
                                 std::lgamma(nd - b + 1.0) - lg_n;
            for (long long nij = lo; nij <= hi; ++nij) {
                const double v = static_cast<double>(nij);
                const double log_p = fixed - std::lgamma(v + 1.0) - std::lgamma(a - v + 1.0) - std::lgamma(b - v + 1.0) -
                                     std::lgamma(nd - a - b + v + 1.0);
                emi += v / nd * std::log(nd * v / (a * b)) * std::exp(log_p);
            }
        }
    }
    return emi;
}

/// True when b is a relabeling of a (a bijection maps one onto the other).
inline bool same_partition(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd;
    std::map<int, int> back;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [f, f_new] = fwd.emplace(a[i], b[i]);
        auto [r, r_new] = back.emplace(b[i], a[i]);
        if (f->second != b[i] || r->second != a[i]) return false;
    }
    return true;
}

/**
 * @brief Adjusted Mutual Information with natural logs and the arithmetic
 * mean normalizer: (MI - EMI) / ((H(a) + H(b)) / 2 - EMI).
 *
 * Identical partitions (up to relabeling) score exactly 1. A vanishing
 * denominator, e.g. one constant labeling against a non-constant one, scores 0.
 */
inline double adjusted_mutual_information(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("adjusted_mutual_information: labelings have lengths " + std::to_string(a.size()) +
                              " and " + std::to_string(b.size()));
    }
    if (a.empty()) throw EmptySetError("adjusted_mutual_information: empty labelings");
    if (same_partition(a, b)) return 1.0;
    const Contingency t = contingency(a, b);
    const double mi = mutual_information(t);
    const double emi = expected_mutual_information(t);
    const double ha = entropy_of_counts(t.row_sums, t.n);
    const double hb = entropy_of_counts(t.col_sums, t.n);
    const double denom = 0.5 * (ha + hb) - emi;
    if (std::abs(denom) < 1e-15) return 0.0;
    return (mi - emi) / denom;
}

}  // namespace rsf::analysis
