#include "ictus/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ictus/error.hpp"
#include "ictus/text.hpp"

namespace ictus {

using cplx = std::complex<double>;

bool Biquad::stable() const {
    // Jury conditions for z^2 + a1 z + a2.
    return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

cplx Biquad::response(double freq_hz, double fs_hz) const {
    const double w = 2.0 * std::numbers::pi * freq_hz / fs_hz;
    const cplx z1 = std::polar(1.0, -w);
    const cplx z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

bool BiquadCascade::stable() const {
    return std::all_of(sections.begin(), sections.end(), [](const Biquad& s) { return s.stable(); });
}

cplx BiquadCascade::response(double freq_hz, double fs_hz) const {
    cplx h = 1.0;
    for (const auto& s : sections) h *= s.response(freq_hz, fs_hz);
    return h;
}

double BiquadCascade::gain_db(double freq_hz, double fs_hz) const {
    return 20.0 * std::log10(std::abs(response(freq_hz, fs_hz)));
}

BiquadCascade design_butterworth_bandpass(double low_hz, double high_hz, int order, double fs_hz) {
    if (!(fs_hz > 0.0)) throw ValidationError("sampling rate must be positive");
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs_hz / 2.0)) {
        throw ValidationError("bandpass edges must satisfy 0 < low < high < fs/2");
    }
    if (order < 2 || order > 8 || order % 2 != 0) throw ValidationError("bandpass order must be 2, 4, 6 or 8");

    const int proto_order = order / 2;
    const double two_fs = 2.0 * fs_hz;
    const double w_low = two_fs * std::tan(std::numbers::pi * low_hz / fs_hz);
    const double w_high = two_fs * std::tan(std::numbers::pi * high_hz / fs_hz);
    const double bandwidth = w_high - w_low;
    const double center_sq = w_low * w_high;

    std::vector<cplx> upper;
    std::vector<double> real_poles;
    for (int k = 0; k < proto_order; ++k) {
        const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + proto_order + 1) / (2.0 * proto_order));
        const cplx pb = p * bandwidth;
        const cplx root = std::sqrt(pb * pb - 4.0 * center_sq);
        for (const cplx s : {(pb + root) / 2.0, (pb - root) / 2.0}) {
            const cplx z = (two_fs + s) / (two_fs - s);
            if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) {
                real_poles.push_back(z.real());
            } else if (z.imag() > 0.0) {
                upper.push_back(z);
            }
        }
    }
    std::sort(real_poles.begin(), real_poles.end());
    if (real_poles.size() % 2 != 0) throw std::logic_error("unpaired real pole in bandpass design");

    const double center_hz = fs_hz / std::numbers::pi * std::atan(std::sqrt(center_sq) / two_fs);
    BiquadCascade cascade;
    auto add_section = [&](double a1, double a2) {
        Biquad s{1.0, 0.0, -1.0, a1, a2};
        const double g = 1.0 / std::abs(s.response(center_hz, fs_hz));
        s.b0 *= g;
        s.b2 *= g;
        cascade.sections.push_back(s);
    };
    for (const cplx z : upper) add_section(-2.0 * z.real(), std::norm(z));
    for (std::size_t i = 0; i < real_poles.size(); i += 2) {
        add_section(-(real_poles[i] + real_poles[i + 1]), real_poles[i] * real_poles[i + 1]);
    }
    if (cascade.order() != order) throw std::logic_error("bandpass design produced wrong section count");
    cascade.description = "butterworth bandpass " + format_g17(low_hz) + "-" + format_g17(high_hz) +
                          " Hz order " + std::to_string(order);
    return cascade;
}

BiquadCascade design_notch(double center_hz, double bandwidth_hz, double fs_hz) {
    if (!(fs_hz > 0.0)) throw ValidationError("sampling rate must be positive");
    if (!(center_hz > 0.0 && center_hz < fs_hz / 2.0)) throw ValidationError("notch centre must be in (0, fs/2)");
    if (!(bandwidth_hz > 0.0 && bandwidth_hz < center_hz)) {
        throw ValidationError("notch bandwidth must be in (0, centre)");
    }
    const double w0 = 2.0 * std::numbers::pi * center_hz / fs_hz;
    const double t = std::tan(std::numbers::pi * bandwidth_hz / fs_hz);
    const double alpha = (1.0 - t) / (1.0 + t);
    const double c = std::cos(w0);
    Biquad s;
    s.b0 = (1.0 + alpha) / 2.0;
    s.b1 = -(1.0 + alpha) * c;
    s.b2 = s.b0;
    s.a1 = -(1.0 + alpha) * c;
    s.a2 = alpha;
    BiquadCascade cascade{{s}, "notch " + format_g17(center_hz) + " Hz bw " + format_g17(bandwidth_hz) + " Hz"};
    return cascade;
}

BiquadCascade concat(const BiquadCascade& first, const BiquadCascade& second) {
    BiquadCascade out = first;
    out.sections.insert(out.sections.end(), second.sections.begin(), second.sections.end());
    out.description = first.description.empty() ? second.description : first.description + " + " + second.description;
    return out;
}

StreamingFilter::StreamingFilter(BiquadCascade cascade)
    : cascade_(std::move(cascade)), s1_(cascade_.sections.size()), s2_(cascade_.sections.size()) {}

double StreamingFilter::process(double x) {
    for (std::size_t i = 0; i < cascade_.sections.size(); ++i) {
        const Biquad& s = cascade_.sections[i];
        const double y = s.b0 * x + s1_[i];
        s1_[i] = s.b1 * x - s.a1 * y + s2_[i];
        s2_[i] = s.b2 * x - s.a2 * y;
        x = y;
    }
    return x;
}

void StreamingFilter::reset() {
    std::fill(s1_.begin(), s1_.end(), 0.0);
    std::fill(s2_.begin(), s2_.end(), 0.0);
}

namespace {

void require_finite(std::span<const double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw ValidationError("non-finite input sample at index " + std::to_string(i));
    }
}

}  // namespace

std::vector<double> apply_filter(const BiquadCascade& filter, std::span<const double> x) {
    require_finite(x);
    StreamingFilter stream(filter);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = stream.process(x[i]);
    return y;
}

std::vector<double> apply_filter_zero_phase(const BiquadCascade& filter, std::span<const double> x) {
    std::vector<double> y = apply_filter(filter, x);
    std::reverse(y.begin(), y.end());
    y = apply_filter(filter, y);
    std::reverse(y.begin(), y.end());
    return y;
}

std::vector<double> normalize_max_abs(std::span<const double> x) {
    if (x.empty()) throw ValidationError("cannot normalize an empty signal");
    require_finite(x);
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) throw ValidationError("degenerate signal: all samples are zero");
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / peak;
    return y;
}

BiquadCascade design_filter(const FilterSettings& settings, double fs_hz) {
    BiquadCascade cascade = design_butterworth_bandpass(settings.low_hz, settings.high_hz, settings.order, fs_hz);
    if (settings.notch_hz > 0.0) {
        cascade = concat(cascade, design_notch(settings.notch_hz, settings.notch_bandwidth_hz, fs_hz));
    }
    return cascade;
}

Recording preprocess_recording(const Recording& rec, const FilterSettings& settings) {
    rec.validate();
    const BiquadCascade cascade = design_filter(settings, rec.sampling_rate_hz);
    Recording out = rec;
    out.samples = settings.zero_phase ? apply_filter_zero_phase(cascade, rec.samples)
                                      : apply_filter(cascade, rec.samples);
    if (settings.normalize) out.samples = normalize_max_abs(out.samples);
    return out;
}

}  // namespace ictus
