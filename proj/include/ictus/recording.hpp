#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ictus {

// One referenced scalp electrode with its seizure annotations.
struct Recording {
    std::string id;
    std::string channel_label;  // e.g. "F7"
    double sampling_rate_hz = 256.0;
    std::vector<double> samples;
    std::vector<double> seizure_onsets_s;
    std::vector<double> seizure_offsets_s;
    std::uint64_t config_hash = 0;  // config that produced the file; 0 = raw input

    double duration_s() const { return static_cast<double>(samples.size()) / sampling_rate_hz; }
    std::size_t seizure_count() const { return seizure_onsets_s.size(); }

    // Throws ValidationError on the first broken invariant.
    void validate() const;

    bool operator==(const Recording&) const = default;
};

enum class RecordingFormat { csv, bin };

// ".csv" selects CSV, anything else the binary format.
RecordingFormat format_for_path(const std::filesystem::path& path);

Recording load_recording(const std::filesystem::path& path, RecordingFormat format);
// Detects the format from the file's leading bytes.
Recording load_recording(const std::filesystem::path& path);
void save_recording(const Recording& rec, const std::filesystem::path& path, RecordingFormat format);

struct SeizureSplit {
    std::string recording_id;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;

    // Disjoint, in range, and jointly covering all `seizure_count` seizures.
    void validate(std::size_t seizure_count) const;

    bool operator==(const SeizureSplit&) const = default;
};

// Earliest ceil(2n/3) seizures train, the rest test. Needs at least 3.
SeizureSplit default_split(const Recording& rec);
SeizureSplit make_split(const Recording& rec, std::vector<std::size_t> train, std::vector<std::size_t> test);

void save_split(const SeizureSplit& split, const std::filesystem::path& path);
SeizureSplit load_split(const std::filesystem::path& path);

}  // namespace ictus
