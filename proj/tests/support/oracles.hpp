#pragma once

// Reference implementations kept deliberately independent of the library:
// brute-force counting, flat means, and literal transliterations of the
// level-selection rules. Tests compare library output against these.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Competition rank: 1 + number of strictly better scores.
inline std::vector<int> ranks(const std::vector<double> & scores) {
    std::vector<int> out(scores.size(), 1);
    for (size_t a = 0; a < scores.size(); ++a)
        for (size_t b = 0; b < scores.size(); ++b)
            if (scores[b] > scores[a])
                ++out[a];
    return out;
}

// Ordinal bucket from the percentile rank/total, comparing the rational
// rank/total against 1/6, 2/6, 4/6, 5/6 by cross-multiplication (inclusive
// upper boundaries).
inline int ordinal(int rank, int total) {
    const auto r = static_cast<std::int64_t>(rank);
    const auto n = static_cast<std::int64_t>(total);
    if (6 * r <= 1 * n) return 2;
    if (6 * r <= 2 * n) return 1;
    if (6 * r <= 4 * n) return 0;
    if (6 * r <= 5 * n) return -1;
    return -2;
}

// Flat per-draft and per-plan means of a leaf-ordinal tensor laid out
// [plan][draft][refine].
struct flat_means {
    std::vector<std::vector<double>> per_draft; // [plan][draft]
    std::vector<double>              per_plan;  // [plan]
};

inline flat_means aggregate(const std::vector<std::vector<std::vector<int>>> & ordinals) {
    flat_means out;
    for (const auto & plan : ordinals) {
        std::vector<double> draft_means;
        long double         plan_sum = 0.0L;
        for (const auto & draft : plan) {
            long double sum = 0.0L;
            for (int v : draft)
                sum += v;
            draft_means.push_back(static_cast<double>(sum / draft.size()));
            plan_sum += static_cast<long double>(sum / draft.size());
        }
        out.per_draft.push_back(std::move(draft_means));
        out.per_plan.push_back(static_cast<double>(plan_sum / plan.size()));
    }
    return out;
}

// One harvested pair at the index level: -1 marks an unused coordinate.
struct pair_ref {
    std::string level; // "plan" | "write" | "refine"
    int         ci = -1, cj = -1, ck = -1;
    int         ri = -1, rj = -1, rk = -1;

    bool operator==(const pair_ref &) const = default;
    bool operator<(const pair_ref & o) const {
        return std::tie(level, ci, cj, ck, ri, rj, rk) <
               std::tie(o.level, o.ci, o.cj, o.ck, o.ri, o.rj, o.rk);
    }
};

inline size_t arg_max(const std::vector<double> & v) {
    size_t best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best])
            best = i;
    return best;
}

inline size_t arg_min(const std::vector<double> & v) {
    size_t best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[best])
            best = i;
    return best;
}

// Literal transliteration of the harvest rules over per-level rewards.
//   plan:   best plan vs the two worst others (fewer when < 2 others)
//   write:  for each of the best two plans, best vs worst draft
//   refine: within each write-level winner draft, best vs worst leaf
// A level instance whose argmax equals its argmin contributes nothing.
inline std::vector<pair_ref> harvest(const std::vector<double> &              plan_r,
                                     const std::vector<std::vector<double>> & draft_r,
                                     const std::vector<std::vector<std::vector<double>>> & leaf_s,
                                     bool refine_from_losers = false) {
    std::vector<pair_ref> out;
    const int             n_plans = static_cast<int>(plan_r.size());

    // Plan level.
    const int best_plan = static_cast<int>(arg_max(plan_r));
    if (best_plan != static_cast<int>(arg_min(plan_r))) {
        std::vector<int> others;
        for (int i = 0; i < n_plans; ++i)
            if (i != best_plan)
                others.push_back(i);
        std::stable_sort(others.begin(), others.end(),
                         [&](int a, int b) { return plan_r[a] < plan_r[b]; });
        for (size_t t = 0; t < others.size() && t < 2; ++t)
            out.push_back({"plan", best_plan, -1, -1, others[t], -1, -1});
    }

    // Best two plans by aggregated reward, index ascending on ties.
    std::vector<int> order(n_plans);
    for (int i = 0; i < n_plans; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return plan_r[a] > plan_r[b]; });
    const int top = std::min(2, n_plans);

    for (int t = 0; t < top; ++t) {
        const int    p    = order[t];
        const auto & row  = draft_r[p];
        const int    jmax = static_cast<int>(arg_max(row));
        const int    jmin = static_cast<int>(arg_min(row));
        if (jmax == jmin)
            continue; // degenerate write level: no pair, nothing to descend into
        out.push_back({"write", p, jmax, -1, p, jmin, -1});

        const int    anchor = refine_from_losers ? jmin : jmax;
        const auto & leaves = leaf_s[p][anchor];
        const int    kmax   = static_cast<int>(arg_max(leaves));
        const int    kmin   = static_cast<int>(arg_min(leaves));
        if (kmax != kmin)
            out.push_back({"refine", p, anchor, kmax, p, anchor, kmin});
    }
    return out;
}

// Flat mean over every recorded criterion value, all runs pooled. Equals
// mean-of-run-means when every run carries the full criterion set.
inline double judge_mean(const std::vector<std::map<std::string, double>> & runs) {
    long double sum = 0.0L;
    size_t      n   = 0;
    for (const auto & run : runs)
        for (const auto & [name, v] : run) {
            sum += v;
            ++n;
        }
    return n == 0 ? std::nan("") : static_cast<double>(sum / n);
}

// Extended-precision softplus(-beta * delta).
inline long double dpo_loss(long double beta, long double delta) {
    const long double x = -beta * delta;
    if (x > 40.0L)
        return x; // exp(x) overflows the addition; softplus(x) ~ x
    return std::log1p(std::exp(x)); // long double overloads via <cmath>
}

} // namespace oracle
