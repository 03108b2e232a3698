#include "ictus/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "ictus/detail/binary_io.hpp"
#include "ictus/error.hpp"
#include "ictus/random.hpp"

namespace ictus {

double overlap_length(std::span<const Interval> a, std::span<const Interval> b) {
    double total = 0.0;
    for (const auto& x : a) {
        for (const auto& y : b) {
            const double lo = std::max(x.begin_s, y.begin_s);
            const double hi = std::min(x.end_s, y.end_s);
            if (hi > lo) total += hi - lo;
        }
    }
    return total;
}

const char* to_string(WindowLabel label) {
    return label == WindowLabel::preictal ? "preictal" : "interictal";
}

std::vector<Interval> IntervalLabeling::spans(std::span<const LabeledInterval> items) {
    std::vector<Interval> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(item.span);
    return out;
}

IntervalLabeling label_intervals(const Recording& rec, int preictal_minutes, double postictal_minutes) {
    if (preictal_minutes <= 0) throw ValidationError("preictal minutes must be positive");
    if (postictal_minutes < 0.0) throw ValidationError("postictal buffer must be non-negative");

    IntervalLabeling lab;
    lab.preictal_minutes = preictal_minutes;
    lab.postictal_minutes = postictal_minutes;
    lab.duration_s = rec.duration_s();
    const double duration = lab.duration_s;
    const std::size_t n = rec.seizure_count();

    // Claimed (non-interictal) spans in chronological order, with owner.
    struct Claim {
        Interval span;
        std::size_t seizure;
    };
    std::vector<Claim> claims;
    double previous_end = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double onset = rec.seizure_onsets_s[k];
        const double offset = rec.seizure_offsets_s[k];
        const double pre_begin = std::max({onset - 60.0 * preictal_minutes, previous_end, 0.0});
        if (pre_begin < onset) {
            lab.preictal.push_back({{pre_begin, onset}, k});
            claims.push_back({{pre_begin, onset}, k});
        } else {
            lab.dropped_seizures.push_back(k);
            lab.warnings.push_back("seizure " + std::to_string(k) + " has no preictal data available; dropped");
        }
        lab.ictal.push_back({{onset, offset}, k});
        claims.push_back({{onset, offset}, k});
        double buffer_end = std::min(offset + 60.0 * postictal_minutes, duration);
        if (k + 1 < n) buffer_end = std::min(buffer_end, rec.seizure_onsets_s[k + 1]);
        if (buffer_end > offset) {
            lab.excluded.push_back({{offset, buffer_end}, k});
            claims.push_back({{offset, buffer_end}, k});
        }
        previous_end = std::max(offset, buffer_end);
    }

    std::sort(claims.begin(), claims.end(),
              [](const Claim& a, const Claim& b) { return a.span.begin_s < b.span.begin_s; });
    auto following_seizure = [&](double t) -> std::optional<std::size_t> {
        for (std::size_t k = 0; k < n; ++k) {
            if (rec.seizure_onsets_s[k] >= t) return k;
        }
        return std::nullopt;
    };
    double cursor = 0.0;
    for (const auto& claim : claims) {
        if (claim.span.begin_s > cursor) {
            lab.interictal.push_back({{cursor, claim.span.begin_s}, following_seizure(claim.span.begin_s)});
        }
        cursor = std::max(cursor, claim.span.end_s);
    }
    if (duration > cursor) lab.interictal.push_back({{cursor, duration}, std::nullopt});
    return lab;
}

std::vector<Interval> seizure_blocks(const Recording& rec, double postictal_minutes) {
    std::vector<Interval> blocks;
    const double duration = rec.duration_s();
    double begin = 0.0;
    for (std::size_t k = 0; k < rec.seizure_count(); ++k) {
        double end = std::min(rec.seizure_offsets_s[k] + 60.0 * postictal_minutes, duration);
        if (k + 1 < rec.seizure_count()) end = std::min(end, rec.seizure_onsets_s[k + 1]);
        if (k + 1 == rec.seizure_count()) end = duration;
        blocks.push_back({begin, end});
        begin = end;
    }
    return blocks;
}

std::int64_t window_length_samples(double fs_hz) { return static_cast<std::int64_t>(std::llround(fs_hz)); }

std::vector<std::int64_t> window_starts(std::int64_t begin, std::int64_t end, std::int64_t length,
                                        std::int64_t stride) {
    std::vector<std::int64_t> starts;
    for (std::int64_t s = begin; s + length <= end; s += stride) starts.push_back(s);
    return starts;
}

namespace {

std::int64_t first_sample_at(double t, double fs) { return static_cast<std::int64_t>(std::ceil(t * fs - 1e-9)); }
std::int64_t last_sample_before(double t, double fs) {
    return static_cast<std::int64_t>(std::floor(t * fs + 1e-9));
}

std::vector<SegmentWindow> cut(std::span<const LabeledInterval> intervals, const Recording& rec, WindowLabel label,
                               std::int64_t stride) {
    const double fs = rec.sampling_rate_hz;
    const std::int64_t len = window_length_samples(fs);
    std::vector<SegmentWindow> out;
    for (const auto& item : intervals) {
        const auto begin = first_sample_at(item.span.begin_s, fs);
        const auto end = std::min<std::int64_t>(last_sample_before(item.span.end_s, fs),
                                                static_cast<std::int64_t>(rec.samples.size()));
        for (auto s : window_starts(begin, end, len, stride)) {
            out.push_back({rec.id, s, len, label, item.seizure});
        }
    }
    return out;
}

}  // namespace

std::vector<SegmentWindow> window_interictal(const IntervalLabeling& lab, const Recording& rec) {
    return cut(lab.interictal, rec, WindowLabel::interictal, window_length_samples(rec.sampling_rate_hz));
}

std::vector<SegmentWindow> window_preictal(const IntervalLabeling& lab, const Recording& rec) {
    const std::int64_t len = window_length_samples(rec.sampling_rate_hz);
    return cut(lab.preictal, rec, WindowLabel::preictal, std::max<std::int64_t>(1, len / 2));
}

std::vector<std::size_t> allocate_evenly(std::span<const std::size_t> group_sizes, std::size_t target) {
    std::vector<std::size_t> counts(group_sizes.size(), 0);
    std::size_t capacity = 0;
    for (auto s : group_sizes) capacity += s;
    target = std::min(target, capacity);
    std::size_t remaining = target;
    while (remaining > 0) {
        for (std::size_t g = 0; g < group_sizes.size() && remaining > 0; ++g) {
            if (counts[g] < group_sizes[g]) {
                ++counts[g];
                --remaining;
            }
        }
    }
    return counts;
}

namespace {

// Group key: seizure index, with "no seizure" ordered last.
std::size_t group_key(const SegmentWindow& w) { return w.source_seizure.value_or(SIZE_MAX); }

bool window_less(const SegmentWindow& a, const SegmentWindow& b) {
    if (a.start_sample != b.start_sample) return a.start_sample < b.start_sample;
    return group_key(a) < group_key(b);
}

std::vector<SegmentWindow> subsample(std::span<const SegmentWindow> windows, std::size_t target, Rng& rng) {
    std::map<std::size_t, std::vector<SegmentWindow>> groups;
    for (const auto& w : windows) groups[group_key(w)].push_back(w);
    std::vector<std::size_t> sizes;
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(), window_less);
        sizes.push_back(members.size());
    }
    const auto counts = allocate_evenly(sizes, target);
    std::vector<SegmentWindow> out;
    std::size_t g = 0;
    for (auto& [key, members] : groups) {
        const std::size_t take = counts[g++];
        // Partial Fisher-Yates: the first `take` slots become a uniform sample.
        for (std::size_t i = 0; i < take; ++i) {
            std::swap(members[i], members[i + rng.below(members.size() - i)]);
        }
        out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(out.begin(), out.end(), window_less);
    return out;
}

}  // namespace

BalancedSet balance_classes(std::span<const SegmentWindow> preictal, std::span<const SegmentWindow> interictal,
                            std::uint64_t seed, std::size_t max_per_class) {
    if (preictal.empty()) throw ValidationError("cannot balance: no preictal windows");
    if (interictal.empty()) throw ValidationError("cannot balance: no interictal windows");
    std::size_t target = std::min(preictal.size(), interictal.size());
    if (max_per_class > 0) target = std::min(target, max_per_class);
    Rng pre_rng(derive_seed(seed, 1));
    Rng inter_rng(derive_seed(seed, 2));
    return {subsample(preictal, target, pre_rng), subsample(interictal, target, inter_rng)};
}

namespace {
constexpr char kWindowMagic[] = "ICTUSWIN";
constexpr std::uint32_t kWindowVersion = 1;
}  // namespace

void save_window_set(const std::filesystem::path& path, const WindowSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kWindowMagic, 8);
    detail::write_le(out, kWindowVersion);
    detail::write_string(out, set.recording_path);
    detail::write_string(out, set.recording_id);
    detail::write_le(out, set.config_hash);
    detail::write_le(out, static_cast<std::uint32_t>(set.preictal_minutes));
    detail::write_le(out, static_cast<std::uint64_t>(set.window_length));
    detail::write_le(out, static_cast<std::uint64_t>(set.windows.size()));
    for (const auto& w : set.windows) {
        detail::write_le(out, static_cast<std::uint64_t>(w.start_sample));
        detail::write_le(out, static_cast<std::uint8_t>(w.label));
        const std::int32_t src = w.source_seizure ? static_cast<std::int32_t>(*w.source_seizure) : -1;
        detail::write_le(out, static_cast<std::uint32_t>(src));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

WindowSet load_window_set(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    detail::expect_magic(in, kWindowMagic, 8, "windows");
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != kWindowVersion) throw ValidationError("unsupported windows file version " + std::to_string(version));
    WindowSet set;
    set.recording_path = detail::read_string(in);
    set.recording_id = detail::read_string(in);
    set.config_hash = detail::read_le<std::uint64_t>(in);
    set.preictal_minutes = static_cast<int>(detail::read_le<std::uint32_t>(in));
    set.window_length = static_cast<std::int64_t>(detail::read_le<std::uint64_t>(in));
    const auto n = detail::read_le<std::uint64_t>(in);
    if (set.window_length <= 0) throw ValidationError("windows file: bad window length");
    for (std::uint64_t i = 0; i < n; ++i) {
        SegmentWindow w;
        w.recording_id = set.recording_id;
        w.length = set.window_length;
        w.start_sample = static_cast<std::int64_t>(detail::read_le<std::uint64_t>(in));
        const auto label = detail::read_le<std::uint8_t>(in);
        if (label > 1) throw ValidationError("windows file: bad label " + std::to_string(label));
        w.label = static_cast<WindowLabel>(label);
        const auto src = static_cast<std::int32_t>(detail::read_le<std::uint32_t>(in));
        if (src >= 0) w.source_seizure = static_cast<std::size_t>(src);
        set.windows.push_back(std::move(w));
    }
    return set;
}

}  // namespace ictus
