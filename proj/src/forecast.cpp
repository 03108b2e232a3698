#include "ictus/forecast.hpp"

#include <cmath>

#include "ictus/error.hpp"

namespace ictus {

void ForecastConfig::validate() const {
    if (smoothing_window_s < 1) throw ValidationError("smoothing window must be >= 1 s");
    if (!(likelihood_threshold > 0.0 && likelihood_threshold < 1.0)) throw ValidationError("Z must be in (0, 1)");
    if (!(firing_threshold > 0.0 && firing_threshold < 1.0)) throw ValidationError("Y must be in (0, 1)");
    if (preictal_minutes < 1) throw ValidationError("preictal minutes must be >= 1");
    if (!(sph_minutes >= 0.0)) throw ValidationError("SPH must be non-negative");
    if (!(sop_minutes() > 0.0)) throw ValidationError("SOP must be positive");
}

const char* to_string(AlarmClass c) {
    switch (c) {
        case AlarmClass::true_positive: return "TP";
        case AlarmClass::false_positive: return "FP";
        case AlarmClass::unresolved: return "unresolved";
    }
    return "?";
}

namespace {

// Trailing window mean. The running sum is rebuilt from scratch every
// `window` steps so rounding drift stays bounded by one window's additions.
template <class T>
std::vector<double> trailing_mean(const std::vector<T>& x, std::size_t window) {
    std::vector<double> out;
    if (window == 0 || x.size() < window) return out;
    out.reserve(x.size() - window + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < window; ++i) sum += static_cast<double>(x[i]);
    out.push_back(sum / static_cast<double>(window));
    for (std::size_t t = window; t < x.size(); ++t) {
        if ((t - window + 1) % window == 0) {
            sum = 0.0;
            for (std::size_t i = t - window + 1; i <= t; ++i) sum += static_cast<double>(x[i]);
        } else {
            sum += static_cast<double>(x[t]) - static_cast<double>(x[t - window]);
        }
        out.push_back(sum / static_cast<double>(window));
    }
    return out;
}

}  // namespace

LikelihoodSeries smooth_likelihood(const ProbabilityStream& stream, int window_s) {
    if (window_s < 1) throw ValidationError("smoothing window must be >= 1 s");
    LikelihoodSeries out;
    out.first_time_s = stream.time_available(static_cast<std::size_t>(window_s - 1));
    out.values = trailing_mean(stream.values, static_cast<std::size_t>(window_s));
    return out;
}

BinarySeries binarize(const LikelihoodSeries& likelihood, double z) {
    BinarySeries out;
    out.first_time_s = likelihood.first_time_s;
    out.values.resize(likelihood.size());
    for (std::size_t i = 0; i < likelihood.size(); ++i) out.values[i] = likelihood.values[i] > z ? 1 : 0;
    return out;
}

FiringPowerSeries firing_power(const BinarySeries& b, int preictal_minutes) {
    if (preictal_minutes < 1) throw ValidationError("preictal minutes must be >= 1");
    const auto window = static_cast<std::size_t>(60 * preictal_minutes);
    FiringPowerSeries out;
    out.first_time_s = b.first_time_s + static_cast<double>(window - 1);
    if (b.size() < window) return out;
    // Counts of a 0/1 series are exact in integers.
    out.values.reserve(b.size() - window + 1);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < window; ++i) ones += b.values[i];
    out.values.push_back(static_cast<double>(ones) / static_cast<double>(window));
    for (std::size_t t = window; t < b.size(); ++t) {
        ones += b.values[t];
        ones -= b.values[t - window];
        out.values.push_back(static_cast<double>(ones) / static_cast<double>(window));
    }
    return out;
}

std::vector<AlarmEvent> raise_alarms(const FiringPowerSeries& fp, const ForecastConfig& cfg) {
    cfg.validate();
    std::vector<AlarmEvent> alarms;
    const double refractory = cfg.refractory_s();
    for (std::size_t i = 0; i < fp.size(); ++i) {
        const double t = fp.time_at(i);
        if (!alarms.empty() && t < alarms.back().time_s + refractory) continue;
        if (fp.values[i] > cfg.firing_threshold) alarms.push_back({t, fp.values[i], AlarmClass::unresolved});
    }
    return alarms;
}

ForecastTrace run_forecast(const ProbabilityStream& stream, const ForecastConfig& cfg) {
    cfg.validate();
    ForecastTrace trace;
    trace.likelihood = smooth_likelihood(stream, cfg.smoothing_window_s);
    trace.binary = binarize(trace.likelihood, cfg.likelihood_threshold);
    trace.firing_power = firing_power(trace.binary, cfg.preictal_minutes);
    trace.alarms = raise_alarms(trace.firing_power, cfg);
    return trace;
}

}  // namespace ictus
