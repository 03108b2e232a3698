#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ictus/classifier.hpp"
#include "ictus/encoders.hpp"
#include "ictus/evaluation.hpp"
#include "ictus/preprocess.hpp"

namespace ictus {

// Every stage parameter in one place. Serialized as sorted "key = value"
// lines; the FNV-1a hash of that text stamps every artifact.
struct PipelineConfig {
    FilterSettings filter;

    double postictal_minutes = kDefaultPostictalMinutes;
    std::vector<int> preictal_minutes{10, 20, 30, 40};
    std::uint64_t segment_seed = 7;
    std::size_t max_windows_per_class = 0;  // 0 = no cap

    std::vector<EncoderKind> encoders{EncoderKind::rp, EncoderKind::gaf, EncoderKind::mtf};
    int mtf_bins = 8;
    RecurrenceOptions recurrence;

    TrainConfig train;

    int smoothing_window_s = 60;
    double sph_minutes = 5.0;
    std::optional<double> sop_minutes;  // unset = half the preictal time

    std::vector<double> grid_z = GridAxes::default_z();
    std::vector<double> grid_y = GridAxes::default_y();

    std::uint64_t synth_seed = 42;
    unsigned threads = 1;

    // Throws ValidationError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;
    static std::vector<std::string> keys();

    std::string to_text() const;
    std::uint64_t hash() const;
    void validate() const;

    EncoderSettings encoder_settings(EncoderKind kind) const;
    GridAxes grid_axes() const;
    SearchSettings search_settings() const;
    ForecastConfig forecast_config(int preictal, double z, double y) const;
};

// Reads "key = value" lines ('#' comments allowed) on top of the defaults.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view text);

// Settings used by the one-command synthetic benchmark.
PipelineConfig repro_config();

}  // namespace ictus
