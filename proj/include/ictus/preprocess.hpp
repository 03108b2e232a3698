#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "ictus/recording.hpp"

namespace ictus {

// Second-order section, a0 normalized to 1:
//   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    bool stable() const;
    std::complex<double> response(double freq_hz, double fs_hz) const;
};

struct BiquadCascade {
    std::vector<Biquad> sections;
    std::string description;

    int order() const { return 2 * static_cast<int>(sections.size()); }
    bool stable() const;
    std::complex<double> response(double freq_hz, double fs_hz) const;
    double gain_db(double freq_hz, double fs_hz) const;
};

// Butterworth bandpass by analog prototype, low-to-band-pass transform and the
// bilinear transform with both edges pre-warped. `order` is the order of the
// resulting bandpass (even; the prototype has order/2 poles), so it factors
// into order/2 biquads. Each section is scaled to unity gain at the centre.
BiquadCascade design_butterworth_bandpass(double low_hz, double high_hz, int order, double fs_hz);

// Second-order notch with an exact -3 dB bandwidth.
BiquadCascade design_notch(double center_hz, double bandwidth_hz, double fs_hz);

BiquadCascade concat(const BiquadCascade& first, const BiquadCascade& second);

// Stateful direct-form-II-transposed evaluator. One instance per stream.
class StreamingFilter {
public:
    explicit StreamingFilter(BiquadCascade cascade);
    double process(double x);
    void reset();

private:
    BiquadCascade cascade_;
    std::vector<double> s1_, s2_;
};

// Causal, zero initial state.
std::vector<double> apply_filter(const BiquadCascade& filter, std::span<const double> x);
// Forward then time-reversed pass; doubles the effective order.
std::vector<double> apply_filter_zero_phase(const BiquadCascade& filter, std::span<const double> x);

std::vector<double> normalize_max_abs(std::span<const double> x);

struct FilterSettings {
    double low_hz = 0.5;
    double high_hz = 100.0;
    int order = 4;
    double notch_hz = 50.0;  // <= 0 disables the notch
    double notch_bandwidth_hz = 2.0;
    bool zero_phase = false;
    bool normalize = true;
};

BiquadCascade design_filter(const FilterSettings& settings, double fs_hz);

// Filter then (optionally) max-abs normalize the whole recording.
Recording preprocess_recording(const Recording& rec, const FilterSettings& settings);

}  // namespace ictus
