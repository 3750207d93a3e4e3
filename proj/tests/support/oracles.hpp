#pragma once

// Reference implementations used only by tests. They are deliberately naive
// and share no code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Rank by counting: 1 + (#smaller) + (#equal - 1) / 2.
inline std::vector<double> count_ranks(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double smaller = 0, equal = 0;
        for (double v : x) {
            if (v < x[i]) ++smaller;
            else if (v == x[i]) ++equal;
        }
        r[i] = 1.0 + smaller + (equal - 1.0) / 2.0;
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0 || sbb == 0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(count_ranks(a), count_ranks(b));
}

struct NaiveMerge {
    std::size_t left, right;
    double height;
};

// O(n^3)-per-step complete link: cluster distance recomputed from members.
// Ties go to the lexicographically smallest (min leaf, min leaf) pair.
inline std::vector<NaiveMerge> complete_link(const std::vector<std::vector<double>>& d) {
    const std::size_t n = d.size();
    struct Cluster {
        std::vector<std::size_t> members;
        std::size_t node;
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back({{i}, i});
    std::vector<NaiveMerge> merges;
    while (active.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        std::pair<std::size_t, std::size_t> best_key{SIZE_MAX, SIZE_MAX};
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                double far = -1;
                for (auto x : active[i].members)
                    for (auto y : active[j].members) far = std::max(far, d[x][y]);
                const auto mi = *std::min_element(active[i].members.begin(), active[i].members.end());
                const auto mj = *std::min_element(active[j].members.begin(), active[j].members.end());
                const std::pair key{std::min(mi, mj), std::max(mi, mj)};
                if (far < best || (far == best && key < best_key)) {
                    best = far;
                    best_key = key;
                    bi = i;
                    bj = j;
                }
            }
        }
        auto& a = active[bi];
        auto& b = active[bj];
        const auto ma = *std::min_element(a.members.begin(), a.members.end());
        const auto mb = *std::min_element(b.members.begin(), b.members.end());
        const bool a_left = ma < mb;
        merges.push_back({a_left ? a.node : b.node, a_left ? b.node : a.node, best});
        Cluster merged{a.members, n + merges.size() - 1};
        merged.members.insert(merged.members.end(), b.members.begin(), b.members.end());
        active.erase(active.begin() + static_cast<long>(bj));
        active.erase(active.begin() + static_cast<long>(bi));
        active.push_back(std::move(merged));
    }
    return merges;
}

// (target, context token, position) -> count, by scanning every window.
using Tally = std::map<std::tuple<std::string, std::string, int>, unsigned>;

inline Tally tally_windows(const std::vector<std::vector<std::string>>& sentences, int before, int after) {
    Tally t;
    for (const auto& s : sentences) {
        const int n = static_cast<int>(s.size());
        for (int i = 0; i < n; ++i) {
            for (int p = -before; p <= after; ++p) {
                if (p == 0 || i + p < 0 || i + p >= n) continue;
                ++t[{s[i], s[i + p], p}];
            }
        }
    }
    return t;
}

inline double choose2(double x) { return x * (x - 1) / 2; }

// Hubert-Arabie adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::pair<std::string, std::string>, double> nij;
    std::map<std::string, double> ai, bj;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++nij[{a[i], b[i]}];
        ++ai[a[i]];
        ++bj[b[i]];
    }
    double index = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : nij) index += choose2(v);
    for (const auto& [k, v] : ai) sa += choose2(v);
    for (const auto& [k, v] : bj) sb += choose2(v);
    const double expected = sa * sb / choose2(static_cast<double>(a.size()));
    const double max_index = (sa + sb) / 2;
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

// Exact binomial coefficient (fits in 64 bits for the sizes used here).
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<std::uint64_t>(r);
}

// Two-sided 2x2 Fisher p by explicit hypergeometric enumeration in long double.
inline long double fisher_2x2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    const std::uint64_t r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
    // Products of small ratios; exact integers overflow 64 bits past n ~ 67.
    auto choose = [](std::uint64_t m, std::uint64_t k) {
        long double r = 1;
        for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<long double>(m - k + i) / i;
        return r;
    };
    auto prob = [&](std::uint64_t x) { return choose(r1, x) * choose(r2, c1 - x) / choose(n, c1); };
    const long double obs = prob(a);
    long double p = 0;
    const std::uint64_t lo = c1 > r2 ? c1 - r2 : 0, hi = std::min(r1, c1);
    for (std::uint64_t x = lo; x <= hi; ++x) {
        const long double px = prob(x);
        if (px <= obs * (1 + 1e-7L)) p += px;
    }
    return std::min<long double>(1, p);
}

} // namespace oracle
