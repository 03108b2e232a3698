#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ictus/error.hpp"
#include "ictus/recording.hpp"
#include "test_support.hpp"

using namespace ictus;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

Recording fixture(std::size_t n = 2560) {
    Recording rec;
    rec.id = "p1";
    rec.channel_label = "F7";
    rec.sampling_rate_hz = 256.0;
    std::mt19937_64 gen(3);
    std::normal_distribution<double> d(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) rec.samples.push_back(d(gen) / 3.0);
    rec.seizure_onsets_s = {8.0};
    rec.seizure_offsets_s = {9.0};
    return rec;
}

Recording with_seizures(std::size_t n) {
    Recording rec = fixture(256 * 100);
    rec.seizure_onsets_s.clear();
    rec.seizure_offsets_s.clear();
    for (std::size_t k = 0; k < n; ++k) {
        rec.seizure_onsets_s.push_back(10.0 + 15.0 * k);
        rec.seizure_offsets_s.push_back(12.0 + 15.0 * k);
    }
    return rec;
}

}  // namespace

TEST(Recording, CsvFixtureDuration) {
    TempDir dir;
    std::string text = "# id=p1\n# channel=F7\n# rate=256\n# seizure=8.0,9.0\n";
    for (int i = 0; i < 2560; ++i) text += "0.25\n";
    write_text(dir / "r.csv", text);
    const Recording rec = load_recording(dir / "r.csv");
    EXPECT_DOUBLE_EQ(rec.duration_s(), 10.0);
    EXPECT_EQ(rec.seizure_count(), 1u);
    EXPECT_EQ(rec.channel_label, "F7");
}

TEST(Recording, EmptySamplesRejected) {
    TempDir dir;
    write_text(dir / "r.csv", "# channel=F7\n# rate=256\n");
    try {
        load_recording(dir / "r.csv");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("no samples"), std::string::npos);
    }
}

TEST(Recording, OffsetBeforeOnsetRejected) {
    TempDir dir;
    std::string text = "# channel=F7\n# rate=256\n# seizure=9.0,8.0\n";
    for (int i = 0; i < 2560; ++i) text += "0\n";
    write_text(dir / "r.csv", text);
    try {
        load_recording(dir / "r.csv");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("annotation order"), std::string::npos);
    }
}

TEST(Recording, MalformedHeaderRejected) {
    TempDir dir;
    write_text(dir / "a.csv", "# rate=256\n0\n");
    EXPECT_THROW(load_recording(dir / "a.csv"), ValidationError);
    write_text(dir / "b.csv", "# channel=F7\n# rate=256\n# colour=blue\n0\n");
    EXPECT_THROW(load_recording(dir / "b.csv"), ValidationError);
    write_text(dir / "c.csv", "# channel=F7\n# rate=256\n0\nabc\n");
    EXPECT_THROW(load_recording(dir / "c.csv"), ValidationError);
}

TEST(Recording, NonFiniteAndOutOfRangeAnnotations) {
    Recording rec = fixture();
    rec.samples[5] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(rec.validate(), ValidationError);
    rec = fixture();
    rec.seizure_offsets_s = {11.0};
    EXPECT_THROW(rec.validate(), ValidationError);
    rec = fixture();
    rec.seizure_onsets_s = {5.0, 4.0};
    rec.seizure_offsets_s = {6.0, 4.5};
    EXPECT_THROW(rec.validate(), ValidationError);
}

TEST(Recording, MissingFileIsIoError) {
    EXPECT_THROW(load_recording("/nonexistent/dir/x.csv"), IoError);
}

TEST(Recording, BinaryRoundTripIsExact) {
    TempDir dir;
    Recording rec = fixture();
    rec.config_hash = 0x1234abcdULL;
    save_recording(rec, dir / "r.rec", RecordingFormat::bin);
    EXPECT_EQ(load_recording(dir / "r.rec"), rec);
    EXPECT_EQ(load_recording(dir / "r.rec", RecordingFormat::bin), rec);
}

TEST(Recording, CsvRoundTripKeepsFullPrecision) {
    TempDir dir;
    const Recording rec = fixture();
    save_recording(rec, dir / "r.csv", RecordingFormat::csv);
    const Recording back = load_recording(dir / "r.csv");
    EXPECT_EQ(back, rec);
}

TEST(Recording, BinToCsvConversion) {
    TempDir dir;
    Recording rec = fixture();
    rec.samples[0] = 0.1 + 0.2;
    save_recording(rec, dir / "r.rec", RecordingFormat::bin);
    save_recording(load_recording(dir / "r.rec"), dir / "r.csv", RecordingFormat::csv);
    EXPECT_EQ(load_recording(dir / "r.csv").samples[0], 0.1 + 0.2);
}

TEST(Recording, SaveToUnwritablePathFails) {
    EXPECT_THROW(save_recording(fixture(), "/nonexistent/dir/r.rec", RecordingFormat::bin), IoError);
}

TEST(Recording, FormatForPath) {
    EXPECT_EQ(format_for_path("a/b.csv"), RecordingFormat::csv);
    EXPECT_EQ(format_for_path("a/b.rec"), RecordingFormat::bin);
}

TEST(Split, DefaultSplitFiveSeizures) {
    const SeizureSplit s = default_split(with_seizures(5));
    EXPECT_EQ(s.train_indices, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(s.test_indices, (std::vector<std::size_t>{4}));
}

TEST(Split, DefaultSplitThreeSeizures) {
    const SeizureSplit s = default_split(with_seizures(3));
    EXPECT_EQ(s.train_indices, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(s.test_indices, (std::vector<std::size_t>{2}));
}

TEST(Split, DefaultSplitMatchesCeilingForManySizes) {
    for (std::size_t n = 3; n <= 5; ++n) {
        const SeizureSplit s = default_split(with_seizures(n));
        const auto expected = static_cast<std::size_t>(std::ceil(2.0 * n / 3.0));
        EXPECT_EQ(s.train_indices.size(), expected) << n;
        EXPECT_EQ(s.train_indices.size() + s.test_indices.size(), n);
    }
}

TEST(Split, TwoSeizuresRejected) { EXPECT_THROW(default_split(with_seizures(2)), ValidationError); }

TEST(Split, ExplicitSplitValidated) {
    const Recording rec = with_seizures(5);
    EXPECT_NO_THROW(make_split(rec, {0, 1, 2}, {3, 4}));
    EXPECT_THROW(make_split(rec, {0, 1, 2}, {2, 4}), ValidationError);
    EXPECT_THROW(make_split(rec, {0, 1}, {3, 4}), ValidationError);
    EXPECT_THROW(make_split(rec, {0, 1, 2, 3}, {5}), ValidationError);
}

TEST(Split, FileRoundTrip) {
    TempDir dir;
    const SeizureSplit s = make_split(with_seizures(5), {0, 1, 2}, {3, 4});
    save_split(s, dir / "s.split");
    EXPECT_EQ(load_split(dir / "s.split"), s);
}
