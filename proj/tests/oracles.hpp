#pragma once

// Independent brute-force references used by the unit and acceptance suites.
// Everything here recomputes from first principles with naive loops and
// compensated long-double summation, sharing no code with src/.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mcuq/mc_tensor.hpp"

namespace mcuq::oracle {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(long double x) {
        const long double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    long double get() const { return sum_ + comp_; }

private:
    long double sum_ = 0;
    long double comp_ = 0;
};

struct BruteMetrics {
    std::vector<double> mean;
    std::size_t predicted = 0;
    double sigma = 0;
    double entropy = 0;
    double mutual_information = 0;
    double feinman = 0;
    double leibig = 0;
    double kwon_aleatoric = 0;
    double kwon_epistemic = 0;
};

inline BruteMetrics brute_metrics(const McSampleSet& set, std::size_t item) {
    const std::size_t t_count = set.passes();
    const std::size_t c_count = set.classes();
    BruteMetrics r;

    std::vector<long double> mean(c_count, 0.0L);
    for (std::size_t c = 0; c < c_count; ++c) {
        CompensatedSum s;
        for (std::size_t t = 0; t < t_count; ++t) s.add(set.prob(t, item, c));
        mean[c] = s.get() / static_cast<long double>(t_count);
    }
    r.mean.resize(c_count);
    for (std::size_t c = 0; c < c_count; ++c) r.mean[c] = static_cast<double>(mean[c]);

    r.predicted = 0;
    for (std::size_t c = 1; c < c_count; ++c)
        if (mean[c] > mean[r.predicted]) r.predicted = c;

    std::vector<long double> variance(c_count, 0.0L);
    for (std::size_t c = 0; c < c_count; ++c) {
        CompensatedSum s;
        for (std::size_t t = 0; t < t_count; ++t) {
            const long double d = static_cast<long double>(set.prob(t, item, c)) - mean[c];
            s.add(d * d);
        }
        variance[c] = s.get() / static_cast<long double>(t_count);
    }

    CompensatedSum sigma_sum, trace;
    for (std::size_t c = 0; c < c_count; ++c) {
        sigma_sum.add(std::sqrt(variance[c]));
        trace.add(variance[c]);
    }
    r.sigma = static_cast<double>(sigma_sum.get() / static_cast<long double>(c_count));
    r.feinman = static_cast<double>(trace.get());
    r.kwon_epistemic = r.feinman;
    r.leibig = static_cast<double>(std::sqrt(variance[r.predicted]));

    CompensatedSum entropy;
    for (std::size_t c = 0; c < c_count; ++c)
        if (mean[c] > 0) entropy.add(-mean[c] * std::log(mean[c]));
    r.entropy = static_cast<double>(entropy.get());

    CompensatedSum pass_entropy_sum, aleatoric;
    for (std::size_t t = 0; t < t_count; ++t) {
        CompensatedSum h;
        for (std::size_t c = 0; c < c_count; ++c) {
            const long double p = set.prob(t, item, c);
            if (p > 0) h.add(-p * std::log(p));
            aleatoric.add(p * (1.0L - p));
        }
        pass_entropy_sum.add(h.get());
    }
    const long double mi =
        entropy.get() - pass_entropy_sum.get() / static_cast<long double>(t_count);
    r.mutual_information = static_cast<double>(mi < 0 ? 0 : mi);
    r.kwon_aleatoric =
        static_cast<double>(aleatoric.get() / static_cast<long double>(t_count));
    return r;
}

/// Rank-then-Pearson at long double; returns NaN for constant series.
inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<long double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const long double avg = (static_cast<long double>(i + 1) + (j + 1)) / 2.0L;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < n; ++i) {
        sx.add(rx[i]);
        sy.add(ry[i]);
    }
    const long double mx = sx.get() / n, my = sy.get() / n;
    CompensatedSum sxy, sxx, syy;
    for (std::size_t i = 0; i < n; ++i) {
        sxy.add((rx[i] - mx) * (ry[i] - my));
        sxx.add((rx[i] - mx) * (rx[i] - mx));
        syy.add((ry[i] - my) * (ry[i] - my));
    }
    if (sxx.get() == 0 || syy.get() == 0) return std::nan("");
    return static_cast<double>(sxy.get() / std::sqrt(sxx.get() * syy.get()));
}

/// Exact minimum-cost assignment (Hungarian with potentials), O(n^3).
inline double assignment_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0;
    for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

/// W1 by exhaustive minimal coupling: expand both samples to lcm(m, n) unit
/// masses and solve the assignment problem exactly.
inline double w1_min_coupling(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t m = a.size(), n = b.size();
    const std::size_t l = std::lcm(m, n);
    std::vector<double> ea, eb;
    ea.reserve(l);
    eb.reserve(l);
    for (double x : a)
        for (std::size_t k = 0; k < l / m; ++k) ea.push_back(x);
    for (double x : b)
        for (std::size_t k = 0; k < l / n; ++k) eb.push_back(x);
    std::vector<std::vector<double>> cost(l, std::vector<double>(l));
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j) cost[i][j] = std::abs(ea[i] - eb[j]);
    return assignment_min_cost(cost) / static_cast<double>(l);
}

/// W1 for equal sizes by brute force over all pairings (n <= 8).
inline double w1_all_permutations(std::vector<double> a, std::vector<double> b) {
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0;
        for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[perm[i]]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

}  // namespace mcuq::oracle
