#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ictus/recording.hpp"

namespace ictus {

// Half-open span of recording time in seconds.
struct Interval {
    double begin_s = 0.0;
    double end_s = 0.0;

    double length() const { return end_s > begin_s ? end_s - begin_s : 0.0; }
    bool empty() const { return !(end_s > begin_s); }
    bool contains(double t) const { return t >= begin_s && t < end_s; }
    bool operator==(const Interval&) const = default;
};

// Total length of the overlap between two sets of disjoint intervals.
double overlap_length(std::span<const Interval> a, std::span<const Interval> b);

enum class WindowLabel : std::uint8_t { interictal = 0, preictal = 1 };

const char* to_string(WindowLabel label);

// An interval tagged with the seizure it belongs to. For preictal, ictal and
// excluded spans that is the owning seizure; for interictal spans it is the
// nearest following seizure (none after the last one).
struct LabeledInterval {
    Interval span;
    std::optional<std::size_t> seizure;
    bool operator==(const LabeledInterval&) const = default;
};

struct IntervalLabeling {
    int preictal_minutes = 0;
    double postictal_minutes = 0.0;
    double duration_s = 0.0;
    std::vector<LabeledInterval> preictal;
    std::vector<LabeledInterval> ictal;
    std::vector<LabeledInterval> interictal;
    std::vector<LabeledInterval> excluded;  // postictal buffers
    std::vector<std::size_t> dropped_seizures;  // no preictal data available
    std::vector<std::string> warnings;

    static std::vector<Interval> spans(std::span<const LabeledInterval> items);
};

inline constexpr double kDefaultPostictalMinutes = 30.0;

// Preictal [onset - X min, onset), clipped at recording start and at the end of
// the previous seizure's postictal buffer. Ictal [onset, offset). Postictal
// buffer after each offset is excluded. Everything else is interictal.
IntervalLabeling label_intervals(const Recording& rec, int preictal_minutes,
                                 double postictal_minutes = kDefaultPostictalMinutes);

// Per-seizure block of the timeline: from the end of the previous seizure's
// postictal buffer to the end of this one's. The last block runs to the end
// of the recording. Used to assign data to train/test seizures.
std::vector<Interval> seizure_blocks(const Recording& rec, double postictal_minutes = kDefaultPostictalMinutes);

struct SegmentWindow {
    std::string recording_id;
    std::int64_t start_sample = 0;
    std::int64_t length = 0;
    WindowLabel label = WindowLabel::interictal;
    std::optional<std::size_t> source_seizure;

    bool operator==(const SegmentWindow&) const = default;
};

std::int64_t window_length_samples(double fs_hz);

// Windows of `length` samples stepping by `stride` inside [begin, end) samples;
// partial tails are dropped.
std::vector<std::int64_t> window_starts(std::int64_t begin, std::int64_t end, std::int64_t length,
                                        std::int64_t stride);

// Non-overlapping 1 s windows inside each interictal interval.
std::vector<SegmentWindow> window_interictal(const IntervalLabeling& lab, const Recording& rec);
// 1 s windows with 50% overlap inside each preictal interval.
std::vector<SegmentWindow> window_preictal(const IntervalLabeling& lab, const Recording& rec);

// Splits `target` across groups of the given sizes: one at a time round-robin
// from the earliest group, skipping groups that are full.
std::vector<std::size_t> allocate_evenly(std::span<const std::size_t> group_sizes, std::size_t target);

struct BalancedSet {
    std::vector<SegmentWindow> preictal;
    std::vector<SegmentWindow> interictal;
};

// Equal class counts = min(|pre|, |inter|), optionally capped at
// `max_per_class` (0 = no cap). A subsampled class is spread evenly across its
// seizure groups and drawn uniformly inside each group. The result does not
// depend on input order.
BalancedSet balance_classes(std::span<const SegmentWindow> preictal, std::span<const SegmentWindow> interictal,
                            std::uint64_t seed, std::size_t max_per_class = 0);

// Windows file: "ICTUSWIN" magic, version, recording path, config hash,
// preictal minutes, window length, then (start_sample, label, source seizure
// or -1) per window.
struct WindowSet {
    std::string recording_path;
    std::string recording_id;
    std::uint64_t config_hash = 0;
    int preictal_minutes = 0;
    std::int64_t window_length = 0;
    std::vector<SegmentWindow> windows;
};

void save_window_set(const std::filesystem::path& path, const WindowSet& set);
WindowSet load_window_set(const std::filesystem::path& path);

}  // namespace ictus
