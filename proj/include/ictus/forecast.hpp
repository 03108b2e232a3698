#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ictus/classifier.hpp"

namespace ictus {

// Regularly sampled series at 1 s spacing; values[i] belongs to time
// first_time_s + i.
template <class T>
struct TimeSeries {
    double first_time_s = 0.0;
    std::vector<T> values;

    double time_at(std::size_t i) const { return first_time_s + static_cast<double>(i); }
    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    bool operator==(const TimeSeries&) const = default;
};

using LikelihoodSeries = TimeSeries<double>;
using BinarySeries = TimeSeries<std::uint8_t>;
using FiringPowerSeries = TimeSeries<double>;

struct ForecastConfig {
    int smoothing_window_s = 60;
    double likelihood_threshold = 0.5;  // Z
    double firing_threshold = 0.5;      // Y
    int preictal_minutes = 20;          // X
    double sph_minutes = 5.0;
    std::optional<double> sop_override_minutes;

    double sop_minutes() const { return sop_override_minutes.value_or(preictal_minutes / 2.0); }
    double refractory_s() const { return 60.0 * (sph_minutes + sop_minutes()); }
    void validate() const;
};

enum class AlarmClass : std::uint8_t { unresolved = 0, true_positive = 1, false_positive = 2 };

const char* to_string(AlarmClass c);

struct AlarmEvent {
    double time_s = 0.0;
    double fp_value = 0.0;
    AlarmClass classification = AlarmClass::unresolved;

    bool operator==(const AlarmEvent&) const = default;
};

// Trailing mean over `window_s` values; the first defined value is at stream
// index window_s - 1. A stream shorter than the window gives an empty series.
LikelihoodSeries smooth_likelihood(const ProbabilityStream& stream, int window_s = 60);

// b_t = 1 iff L_t > Z.
BinarySeries binarize(const LikelihoodSeries& likelihood, double z);

// Fraction of ones over the trailing 60 * X samples, defined once full.
FiringPowerSeries firing_power(const BinarySeries& b, int preictal_minutes);

// An alarm fires at the first t with fp_t > Y outside the refractory period
// of SPH + SOP after the previous alarm. Alarms are left unresolved.
std::vector<AlarmEvent> raise_alarms(const FiringPowerSeries& fp, const ForecastConfig& cfg);

struct ForecastTrace {
    LikelihoodSeries likelihood;
    BinarySeries binary;
    FiringPowerSeries firing_power;
    std::vector<AlarmEvent> alarms;
};

ForecastTrace run_forecast(const ProbabilityStream& stream, const ForecastConfig& cfg);

}  // namespace ictus
