#include "ictus/synthgen.hpp"

#include <cmath>
#include <numbers>

#include "ictus/error.hpp"
#include "ictus/random.hpp"

namespace ictus {

double Background::rms() const { return std::sqrt(noise_level * noise_level + alpha_level * alpha_level / 2.0); }

void SynthConfig::validate() const {
    if (!(fs_hz > 0.0) || !(duration_s > 0.0)) throw ValidationError("synthetic duration and rate must be positive");
    if (!(seizure_duration_s > 0.0)) throw ValidationError("seizure duration must be positive");
    if (signature.ramp_s < 0.0 || signature.amplitude < 0.0) throw ValidationError("signature must be non-negative");
    for (std::size_t k = 0; k < seizure_times_s.size(); ++k) {
        const double onset = seizure_times_s[k];
        const double ramp_begin = onset - signature.ramp_s;
        if (ramp_begin < 0.0) throw ValidationError("seizure " + std::to_string(k) + " leaves no room for its ramp");
        if (onset + seizure_duration_s > duration_s) {
            throw ValidationError("seizure " + std::to_string(k) + " runs past the end of the recording");
        }
        if (k > 0 && ramp_begin < seizure_times_s[k - 1] + seizure_duration_s) {
            throw ValidationError("overlapping ramps: seizure " + std::to_string(k) +
                                  " ramp starts before the previous seizure ends");
        }
    }
}

Recording generate_recording(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const double fs = cfg.fs_hz;
    const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s * fs));
    const double two_pi = 2.0 * std::numbers::pi;

    Recording rec;
    rec.id = cfg.id;
    rec.channel_label = cfg.channel;
    rec.sampling_rate_hz = fs;
    rec.samples.resize(n);

    const Background& bg = cfg.background;
    const double a = std::exp(-two_pi * bg.noise_corner_hz / fs);
    const double innovation = std::sqrt(1.0 - a * a);
    const double alpha_phase = two_pi * rng.uniform();
    double ar = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
        ar = a * ar + innovation * rng.normal();
        const double t = static_cast<double>(i) / fs;
        rec.samples[i] = bg.noise_level * ar + bg.alpha_level * std::sin(two_pi * bg.alpha_hz * t + alpha_phase);
    }

    const PreictalSignature& sig = cfg.signature;
    for (double onset : cfg.seizure_times_s) {
        const double offset = onset + cfg.seizure_duration_s;
        const double phase = two_pi * rng.uniform();
        const auto begin = static_cast<std::size_t>(std::ceil((onset - sig.ramp_s) * fs));
        const auto end = std::min(n, static_cast<std::size_t>(std::ceil(offset * fs)));
        for (std::size_t i = begin; i < end; ++i) {
            const double t = static_cast<double>(i) / fs;
            double envelope = sig.amplitude;
            if (t < onset && sig.ramp_s > 0.0) {
                const double progress = (t - (onset - sig.ramp_s)) / sig.ramp_s;
                envelope = sig.amplitude * (sig.start_fraction + (1.0 - sig.start_fraction) * progress);
            }
            rec.samples[i] += envelope * std::sin(two_pi * sig.rhythm_hz * t + phase);
        }
        rec.seizure_onsets_s.push_back(onset);
        rec.seizure_offsets_s.push_back(offset);
    }
    rec.validate();
    return rec;
}

SynthConfig benchmark_config(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.id = "synthetic-" + std::to_string(seed);
    cfg.duration_s = 8.0 * 3600.0;
    cfg.seizure_times_s = {4800.0, 10560.0, 16320.0, 22080.0, 27840.0};
    cfg.seed = seed;
    return cfg;
}

BenchmarkSuite make_benchmark_suite(std::uint64_t seed) {
    BenchmarkSuite suite;
    suite.recordings.push_back(generate_recording(benchmark_config(seed)));
    suite.splits.push_back(make_split(suite.recordings.front(), {0, 1, 2}, {3, 4}));
    return suite;
}

}  // namespace ictus
