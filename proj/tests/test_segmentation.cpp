#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "ictus/error.hpp"
#include "ictus/segmentation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ictus;

namespace {

Recording timeline(double seconds, std::vector<double> onsets, double seizure_s = 60.0, double fs = 256.0) {
    Recording rec;
    rec.id = "t";
    rec.channel_label = "F7";
    rec.sampling_rate_hz = fs;
    rec.samples.assign(static_cast<std::size_t>(seconds * fs), 0.0);
    for (double o : onsets) {
        rec.seizure_onsets_s.push_back(o);
        rec.seizure_offsets_s.push_back(o + seizure_s);
    }
    return rec;
}

std::vector<SegmentWindow> group(std::size_t n, std::size_t seizure, WindowLabel label, std::int64_t base) {
    std::vector<SegmentWindow> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({"r", base + static_cast<std::int64_t>(256 * i), 256, label, seizure});
    }
    return out;
}

}  // namespace

TEST(Labeling, SingleSeizurePreictal) {
    const auto lab = label_intervals(timeline(7200, {3600}), 20);
    ASSERT_EQ(lab.preictal.size(), 1u);
    EXPECT_EQ(lab.preictal[0].span, (Interval{2400, 3600}));
    EXPECT_EQ(lab.preictal[0].seizure, 0u);
    ASSERT_EQ(lab.ictal.size(), 1u);
    EXPECT_EQ(lab.ictal[0].span, (Interval{3600, 3660}));
    ASSERT_EQ(lab.excluded.size(), 1u);
    EXPECT_EQ(lab.excluded[0].span, (Interval{3660, 3660 + 1800}));
}

TEST(Labeling, SecondPreictalClippedAfterExclusion) {
    // Onsets 30 min apart, X = 40: the second preictal would start at
    // 1800 + 3600 - 2400 but the first seizure's buffer ends at 3600+60+1800.
    const auto lab = label_intervals(timeline(14400, {3600, 3600 + 1800 + 1800}), 40);
    ASSERT_EQ(lab.preictal.size(), 2u);
    EXPECT_EQ(lab.preictal[0].span, (Interval{3600 - 2400, 3600}));
    EXPECT_EQ(lab.preictal[1].span.begin_s, 3600 + 60 + 1800);
    EXPECT_EQ(lab.preictal[1].span.end_s, 7200);
}

TEST(Labeling, NoSeizuresAllInterictal) {
    const auto lab = label_intervals(timeline(600, {}), 20);
    EXPECT_TRUE(lab.preictal.empty());
    ASSERT_EQ(lab.interictal.size(), 1u);
    EXPECT_EQ(lab.interictal[0].span, (Interval{0, 600}));
    EXPECT_FALSE(lab.interictal[0].seizure.has_value());
}

TEST(Labeling, PreictalClippedAtStartAndDropped) {
    const auto lab = label_intervals(timeline(7200, {600}), 20);
    ASSERT_EQ(lab.preictal.size(), 1u);
    EXPECT_EQ(lab.preictal[0].span, (Interval{0, 600}));

    // Second seizure's buffer swallows the next one's preictal entirely.
    const auto dropped = label_intervals(timeline(14400, {3600, 3600 + 60 + 1800}), 20);
    EXPECT_EQ(dropped.dropped_seizures, (std::vector<std::size_t>{1}));
    EXPECT_FALSE(dropped.warnings.empty());
}

TEST(Labeling, InterictalTaggedWithFollowingSeizure) {
    const auto lab = label_intervals(timeline(20000, {3600, 12000}), 10);
    ASSERT_EQ(lab.interictal.size(), 3u);
    EXPECT_EQ(lab.interictal[0].seizure, 0u);
    EXPECT_EQ(lab.interictal[1].seizure, 1u);
    EXPECT_FALSE(lab.interictal[2].seizure.has_value());
}

TEST(Labeling, MatchesPerSecondOracle) {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 200; ++trial) {
        const double duration = 4 * 3600;
        std::vector<double> onsets;
        double t = std::uniform_real_distribution<double>(0, 3000)(gen);
        while (true) {
            t += std::uniform_real_distribution<double>(90, 5000)(gen);
            if (t + 120 >= duration) break;
            onsets.push_back(std::floor(t));
        }
        const double seizure_s = std::floor(std::uniform_real_distribution<double>(10, 100)(gen));
        bool ok = true;
        for (std::size_t k = 1; k < onsets.size(); ++k) ok = ok && onsets[k] > onsets[k - 1] + seizure_s;
        if (!ok) continue;
        const int x = std::array{10, 20, 30, 40}[trial % 4];
        const double post = std::array{0.0, 5.0, 30.0}[trial % 3];
        const Recording rec = timeline(duration, onsets, seizure_s, 1.0);
        const auto lab = label_intervals(rec, x, post);
        auto classify = [&](double s) {
            auto in = [&](const std::vector<LabeledInterval>& items) {
                for (const auto& it : items)
                    if (it.span.contains(s)) return true;
                return false;
            };
            int hits = 0;
            oracle::Second label = oracle::Second::interictal;
            if (in(lab.interictal)) ++hits, label = oracle::Second::interictal;
            if (in(lab.preictal)) ++hits, label = oracle::Second::preictal;
            if (in(lab.ictal)) ++hits, label = oracle::Second::ictal;
            if (in(lab.excluded)) ++hits, label = oracle::Second::excluded;
            EXPECT_EQ(hits, 1) << "second " << s;
            return label;
        };
        for (double s = 0; s < duration; s += 1.0) {
            const auto expected =
                oracle::label_second(s, rec.seizure_onsets_s, rec.seizure_offsets_s, x, post);
            ASSERT_EQ(classify(s), expected) << "trial " << trial << " second " << s;
        }
    }
}

TEST(Blocks, PartitionTimeline) {
    const Recording rec = timeline(20000, {3600, 9000, 15000});
    const auto blocks = seizure_blocks(rec, 30);
    ASSERT_EQ(blocks.size(), 3u);
    EXPECT_EQ(blocks[0], (Interval{0, 3660 + 1800}));
    EXPECT_EQ(blocks[1], (Interval{3660 + 1800, 9060 + 1800}));
    EXPECT_EQ(blocks[2], (Interval{9060 + 1800, 20000}));
}

TEST(Windows, InterictalCounts) {
    const Recording rec = timeline(100, {});
    IntervalLabeling lab;
    lab.interictal = {{{0, 10}, {}}, {{20, 22.5}, {}}, {{30, 30}, {}}};
    const auto w = window_interictal(lab, rec);
    EXPECT_EQ(w.size(), 12u);
    for (const auto& s : w) EXPECT_EQ(s.length, 256);
    EXPECT_EQ(w[10].start_sample, 20 * 256);
}

TEST(Windows, PreictalCounts) {
    const Recording rec = timeline(3600, {});
    IntervalLabeling lab;
    lab.preictal = {{{0, 10}, 0u}};
    EXPECT_EQ(window_preictal(lab, rec).size(), 19u);
    lab.preictal = {{{20, 21}, 0u}};
    EXPECT_EQ(window_preictal(lab, rec).size(), 1u);
    lab.preictal = {{{100, 100 + 1200}, 0u}};
    const auto w = window_preictal(lab, rec);
    EXPECT_EQ(w.size(), 2399u);
    EXPECT_EQ(w[1].start_sample - w[0].start_sample, 128);
    EXPECT_EQ(w[0].label, WindowLabel::preictal);
}

TEST(Windows, StartsHelper) {
    EXPECT_EQ(window_starts(0, 640, 256, 256), (std::vector<std::int64_t>{0, 256}));
    EXPECT_TRUE(window_starts(0, 255, 256, 128).empty());
    EXPECT_EQ(window_length_samples(256.0), 256);
}

TEST(Balance, AllocateEvenly) {
    EXPECT_EQ(allocate_evenly(std::vector<std::size_t>{50, 50}, 60), (std::vector<std::size_t>{30, 30}));
    EXPECT_EQ(allocate_evenly(std::vector<std::size_t>{50, 50}, 61), (std::vector<std::size_t>{31, 30}));
    EXPECT_EQ(allocate_evenly(std::vector<std::size_t>{5, 100, 100}, 60), (std::vector<std::size_t>{5, 28, 27}));
    EXPECT_EQ(allocate_evenly(std::vector<std::size_t>{3}, 10), (std::vector<std::size_t>{3}));
}

TEST(Balance, EvenDrawAcrossGroups) {
    const auto pre = group(60, 0, WindowLabel::preictal, 0);
    auto inter = group(50, 0, WindowLabel::interictal, 100000);
    const auto second = group(50, 1, WindowLabel::interictal, 500000);
    inter.insert(inter.end(), second.begin(), second.end());
    const BalancedSet set = balance_classes(pre, inter, 7);
    EXPECT_EQ(set.preictal.size(), 60u);
    ASSERT_EQ(set.interictal.size(), 60u);
    std::map<std::size_t, int> per_group;
    for (const auto& w : set.interictal) ++per_group[*w.source_seizure];
    EXPECT_EQ(per_group[0], 30);
    EXPECT_EQ(per_group[1], 30);
}

TEST(Balance, EqualSizesKeepEverything) {
    const auto pre = group(20, 0, WindowLabel::preictal, 0);
    const auto inter = group(20, 0, WindowLabel::interictal, 100000);
    const BalancedSet set = balance_classes(pre, inter, 1);
    EXPECT_EQ(set.preictal, pre);
    EXPECT_EQ(set.interictal, inter);
}

TEST(Balance, EmptyClassRejected) {
    const auto pre = group(20, 0, WindowLabel::preictal, 0);
    EXPECT_THROW(balance_classes(pre, {}, 1), ValidationError);
    EXPECT_THROW(balance_classes({}, pre, 1), ValidationError);
}

TEST(Balance, DeterministicAndOrderIndependent) {
    const auto pre = group(30, 0, WindowLabel::preictal, 0);
    auto inter = group(200, 0, WindowLabel::interictal, 100000);
    const BalancedSet a = balance_classes(pre, inter, 11);
    std::reverse(inter.begin(), inter.end());
    const BalancedSet b = balance_classes(pre, inter, 11);
    EXPECT_EQ(a.interictal, b.interictal);
    const BalancedSet c = balance_classes(pre, inter, 12);
    EXPECT_NE(a.interictal, c.interictal);
    std::set<std::int64_t> starts;
    for (const auto& w : a.interictal) starts.insert(w.start_sample);
    EXPECT_EQ(starts.size(), 30u);
}

TEST(Balance, CapPerClass) {
    const auto pre = group(100, 0, WindowLabel::preictal, 0);
    const auto inter = group(300, 0, WindowLabel::interictal, 100000);
    const BalancedSet set = balance_classes(pre, inter, 3, 40);
    EXPECT_EQ(set.preictal.size(), 40u);
    EXPECT_EQ(set.interictal.size(), 40u);
}

TEST(WindowFile, RoundTrip) {
    testing_support::TempDir dir;
    WindowSet set;
    set.recording_path = "/data/r.rec";
    set.recording_id = "r";
    set.config_hash = 99;
    set.preictal_minutes = 20;
    set.window_length = 256;
    set.windows = group(3, 1, WindowLabel::preictal, 0);
    for (auto& w : set.windows) w.recording_id = "r";
    set.windows.push_back({"r", 4096, 256, WindowLabel::interictal, std::nullopt});
    save_window_set(dir / "w.windows", set);
    const WindowSet back = load_window_set(dir / "w.windows");
    EXPECT_EQ(back.recording_path, set.recording_path);
    EXPECT_EQ(back.config_hash, 99u);
    EXPECT_EQ(back.windows, set.windows);
    testing_support::write_text(dir / "bad", "nonsense");
    EXPECT_THROW(load_window_set(dir / "bad"), ValidationError);
}
