#pragma once

// Naive reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline std::vector<double> random_window(std::mt19937_64& gen, std::size_t n = 256) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.01, 5.0);
    std::uniform_real_distribution<double> offset(-3.0, 3.0);
    const double s = scale(gen);
    const double o = offset(gen);
    std::vector<double> w(n);
    for (auto& v : w) v = o + s * noise(gen);
    return w;
}

inline Matrix recurrence(const std::vector<double>& w) {
    const std::size_t n = w.size();
    Matrix m(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = std::fabs(w[i] - w[j]);
    return m;
}

inline std::vector<double> rescale(const std::vector<double>& w) {
    double lo = w[0], hi = w[0];
    for (double v : w) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out(w.size(), 0.0);
    if (hi == lo) return out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = std::clamp(2.0 * (w[i] - lo) / (hi - lo) - 1.0, -1.0, 1.0);
    }
    return out;
}

// Angular form cos(phi_i + phi_j).
inline Matrix gaf_angular(const std::vector<double>& w) {
    const auto x = rescale(w);
    const std::size_t n = x.size();
    Matrix m(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = std::cos(std::acos(x[i]) + std::acos(x[j]));
    return m;
}

// Algebraic form x_i x_j - sqrt(1 - x_i^2) sqrt(1 - x_j^2).
inline Matrix gaf_algebraic(const std::vector<double>& w) {
    const auto x = rescale(w);
    const std::size_t n = x.size();
    Matrix m(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m[i][j] = x[i] * x[j] - std::sqrt(1.0 - x[i] * x[i]) * std::sqrt(1.0 - x[j] * x[j]);
    return m;
}

inline double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Markov {
    std::vector<double> edges;
    std::vector<int> bins;
    Matrix w;
    Matrix field;
};

inline Markov markov(const std::vector<double>& x, int n_bins) {
    Markov out;
    for (int k = 1; k < n_bins; ++k) {
        const double e = percentile(x, static_cast<double>(k) / n_bins);
        bool dup = false;
        for (double prev : out.edges) dup = dup || prev == e;
        if (!dup) out.edges.push_back(e);
    }
    const std::size_t q = out.edges.size() + 1;
    for (double v : x) {
        int b = 0;
        for (double e : out.edges) b += e < v ? 1 : 0;
        out.bins.push_back(b);
    }
    out.w.assign(q, std::vector<double>(q, 0.0));
    for (std::size_t a = 0; a < q; ++a) {
        for (std::size_t b = 0; b < q; ++b) {
            double count = 0;
            for (std::size_t t = 0; t + 1 < x.size(); ++t) {
                if (out.bins[t] == static_cast<int>(a) && out.bins[t + 1] == static_cast<int>(b)) count += 1;
            }
            out.w[a][b] = count;
        }
        double row = 0;
        for (double c : out.w[a]) row += c;
        if (row > 0)
            for (double& c : out.w[a]) c /= row;
    }
    out.field.assign(x.size(), std::vector<double>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) out.field[i][j] = out.w[out.bins[i]][out.bins[j]];
    return out;
}

// Mean of values[i - w + 1 .. i] by direct re-summation.
inline std::vector<double> trailing_mean(const std::vector<double>& values, std::size_t w) {
    std::vector<double> out;
    for (std::size_t i = w - 1; i < values.size(); ++i) {
        double s = 0;
        for (std::size_t k = i + 1 - w; k <= i; ++k) s += values[k];
        out.push_back(s / static_cast<double>(w));
    }
    return out;
}

// Second-by-second alarm simulator: walks the clock, keeps a "quiet until"
// time, fires on fp > y.
inline std::vector<double> simulate_alarms(double first_time, const std::vector<double>& fp, double y,
                                           double refractory_s) {
    std::vector<double> alarms;
    double quiet_until = -1e300;
    for (std::size_t i = 0; i < fp.size(); ++i) {
        const double t = first_time + static_cast<double>(i);
        if (t < quiet_until) continue;
        if (fp[i] > y) {
            alarms.push_back(t);
            quiet_until = t + refractory_s;
        }
    }
    return alarms;
}

struct Match {
    int tp = 0, fn = 0, fp = 0, unresolved = 0;
};

struct Span {
    double begin, end;
    bool contains(double t) const { return t >= begin && t < end; }
};

// Onset by onset: the earliest in-scope alarm whose prediction window holds
// the onset gets it. Then every in-scope alarm without an onset is judged.
inline Match match_alarms(const std::vector<double>& alarms, const std::vector<double>& onsets,
                          const std::vector<Span>& scope, const std::vector<Span>& exclusion, double sph_s,
                          double sop_s) {
    auto inside = [](const std::vector<Span>& spans, double t) {
        for (const auto& s : spans)
            if (s.contains(t)) return true;
        return false;
    };
    std::vector<double> live;
    for (double a : alarms)
        if (inside(scope, a)) live.push_back(a);
    std::vector<bool> used(live.size(), false);
    Match m;
    for (double onset : onsets) {
        bool hit = false;
        for (std::size_t k = 0; k < live.size(); ++k) {
            if (used[k]) continue;
            if (onset > live[k] + sph_s && onset <= live[k] + sph_s + sop_s) {
                used[k] = true;
                hit = true;
                break;
            }
        }
        hit ? ++m.tp : ++m.fn;
    }
    for (std::size_t k = 0; k < live.size(); ++k) {
        if (used[k]) continue;
        inside(exclusion, live[k]) ? ++m.unresolved : ++m.fp;
    }
    return m;
}

enum class Second { interictal, preictal, ictal, excluded };

// Label of the second starting at t, from the annotations alone.
inline Second label_second(double t, const std::vector<double>& on, const std::vector<double>& off, double x_min,
                           double post_min) {
    for (std::size_t k = 0; k < on.size(); ++k)
        if (t >= on[k] && t < off[k]) return Second::ictal;
    for (std::size_t k = 0; k < on.size(); ++k) {
        const double end = k + 1 < on.size() ? std::min(off[k] + 60 * post_min, on[k + 1]) : off[k] + 60 * post_min;
        if (t >= off[k] && t < end) return Second::excluded;
    }
    for (std::size_t k = 0; k < on.size(); ++k)
        if (t >= on[k] - 60 * x_min && t < on[k]) return Second::preictal;
    return Second::interictal;
}

}  // namespace oracle
