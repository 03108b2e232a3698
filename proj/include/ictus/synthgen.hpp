#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ictus/recording.hpp"

namespace ictus {

// Rhythm added before each onset with an amplitude that grows linearly from
// start_fraction * amplitude to amplitude over ramp_s seconds, and held at
// full amplitude through the seizure.
struct PreictalSignature {
    double amplitude = 4.0;
    double rhythm_hz = 3.0;
    double ramp_s = 1200.0;
    double start_fraction = 0.0;
};

// Unit-variance AR(1) noise (low-pass character set by noise_corner_hz)
// scaled to noise_level, plus an alpha-band sinusoid.
struct Background {
    double noise_level = 1.0;
    double noise_corner_hz = 20.0;
    double alpha_level = 0.5;
    double alpha_hz = 10.0;

    double rms() const;
};

struct SynthConfig {
    std::string id = "synthetic";
    std::string channel = "F7";
    double duration_s = 3600.0;
    double fs_hz = 256.0;
    std::vector<double> seizure_times_s;  // onsets
    double seizure_duration_s = 60.0;
    PreictalSignature signature;
    Background background;
    std::uint64_t seed = 42;

    void validate() const;
};

// Deterministic for a given config.
Recording generate_recording(const SynthConfig& cfg);

struct BenchmarkSuite {
    std::vector<Recording> recordings;
    std::vector<SeizureSplit> splits;
};

// One synthetic patient: 5 seizures over 8 simulated hours, first 3 train,
// last 2 test.
SynthConfig benchmark_config(std::uint64_t seed);
BenchmarkSuite make_benchmark_suite(std::uint64_t seed);

}  // namespace ictus
