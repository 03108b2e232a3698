#include <gtest/gtest.h>

#include "ictus/config.hpp"
#include "ictus/error.hpp"
#include "test_support.hpp"

using namespace ictus;

TEST(Config, DefaultsArePopulated) {
    const PipelineConfig cfg;
    EXPECT_EQ(cfg.get("filter.low_hz"), "0.5");
    EXPECT_EQ(cfg.get("filter.high_hz"), "100");
    EXPECT_EQ(cfg.get("filter.order"), "4");
    EXPECT_EQ(cfg.get("filter.notch_hz"), "50");
    EXPECT_EQ(cfg.get("segment.preictal_minutes"), "10,20,30,40");
    EXPECT_EQ(cfg.get("encoder.kinds"), "rp,gaf,mtf");
    EXPECT_EQ(cfg.get("train.batch_size"), "64");
    EXPECT_EQ(cfg.get("train.learning_rate"), "0.001");
    EXPECT_EQ(cfg.get("forecast.sph_minutes"), "5");
    EXPECT_EQ(cfg.get("forecast.sop_minutes"), "auto");
    EXPECT_EQ(cfg.grid_z.size(), 18u);
    EXPECT_EQ(cfg.grid_y.size(), 8u);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, TextRoundTripPreservesHash) {
    PipelineConfig cfg;
    cfg.set("train.seed", "99");
    cfg.set("encoder.rp_threshold", "0.25");
    cfg.set("forecast.sop_minutes", "7.5");
    const PipelineConfig back = parse_config(cfg.to_text());
    EXPECT_EQ(back.to_text(), cfg.to_text());
    EXPECT_EQ(back.hash(), cfg.hash());
    for (const auto& key : PipelineConfig::keys()) EXPECT_EQ(back.get(key), cfg.get(key)) << key;
}

TEST(Config, HashTracksResultChangingKeysOnly) {
    PipelineConfig a, b;
    b.set("runtime.threads", "8");
    EXPECT_EQ(a.hash(), b.hash());
    b.set("grid.y", "0.5");
    EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, UnknownAndInvalidRejected) {
    PipelineConfig cfg;
    EXPECT_THROW(cfg.set("filter.colour", "blue"), ValidationError);
    EXPECT_THROW(cfg.set("train.batch_size", "lots"), ValidationError);
    EXPECT_THROW(cfg.set("encoder.kinds", "rp,xyz"), ValidationError);
    EXPECT_THROW(parse_config("filter.order = 3\n"), ValidationError);
    EXPECT_THROW(parse_config("grid.z = 1.5\n"), ValidationError);
    EXPECT_THROW(parse_config("just words\n"), ValidationError);
}

TEST(Config, FileWithComments) {
    testing_support::TempDir dir;
    testing_support::write_text(dir / "c.txt", "# tuned\nsegment.preictal_minutes = 20\n\nsegment.seed=3\n");
    const PipelineConfig cfg = load_config(dir / "c.txt");
    EXPECT_EQ(cfg.preictal_minutes, (std::vector<int>{20}));
    EXPECT_EQ(cfg.segment_seed, 3u);
    EXPECT_THROW(load_config(dir / "missing.txt"), IoError);
}

TEST(Config, DerivedSettings) {
    PipelineConfig cfg;
    cfg.set("forecast.sop_minutes", "12");
    const auto f = cfg.forecast_config(40, 0.3, 0.6);
    EXPECT_EQ(f.sop_minutes(), 12.0);
    EXPECT_EQ(f.likelihood_threshold, 0.3);
    EXPECT_EQ(cfg.grid_axes().points_per_pair(), 144u);
    EXPECT_EQ(cfg.encoder_settings(EncoderKind::mtf).mtf_bins, 8);
}
