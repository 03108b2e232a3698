#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ictus/error.hpp"
#include "ictus/encoders.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ictus;

namespace {

void expect_matrix(const SquareMatrix& m, const oracle::Matrix& ref, double tol) {
    ASSERT_EQ(m.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        for (std::size_t j = 0; j < ref.size(); ++j) ASSERT_NEAR(m(i, j), ref[i][j], tol) << i << "," << j;
}

void expect_exact(const SquareMatrix& m, const oracle::Matrix& ref) {
    ASSERT_EQ(m.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        for (std::size_t j = 0; j < ref.size(); ++j) EXPECT_EQ(m(i, j), ref[i][j]) << i << "," << j;
}

}  // namespace

TEST(Recurrence, ToyMatrix) {
    const std::vector<double> w{0, 0.5, 1};
    expect_exact(recurrence_plot(w).values, {{0, 0.5, 1}, {0.5, 0, 0.5}, {1, 0.5, 0}});
}

TEST(Recurrence, ConstantWindowIsZero) {
    const std::vector<double> w(32, 0.3);
    const auto m = recurrence_plot(w);
    for (double v : m.values.values()) EXPECT_EQ(v, 0.0);
}

TEST(Recurrence, SymmetricZeroDiagonalAndOracle) {
    std::mt19937_64 gen(1);
    for (int t = 0; t < 10; ++t) {
        const auto w = oracle::random_window(gen);
        const auto m = recurrence_plot(w).values;
        for (std::size_t i = 0; i < m.size(); ++i) {
            EXPECT_EQ(m(i, i), 0.0);
            for (std::size_t j = 0; j < m.size(); ++j) ASSERT_EQ(m(i, j), m(j, i));
        }
        expect_matrix(m, oracle::recurrence(w), 1e-10);
    }
}

TEST(Recurrence, ThresholdAndEmbedding) {
    const std::vector<double> w{0, 0.5, 1};
    RecurrenceOptions opt;
    opt.threshold = 0.5;
    expect_exact(recurrence_plot(w, opt).values, {{1, 1, 0}, {1, 1, 1}, {0, 1, 1}});
    RecurrenceOptions embed;
    embed.dimension = 2;
    const std::vector<double> v{0, 3, 0, 4};
    // Points (0,3), (3,0), (0,4).
    const auto m = recurrence_plot(v, embed).values;
    ASSERT_EQ(m.size(), 3u);
    EXPECT_NEAR(m(0, 1), std::sqrt(18.0), 1e-12);
    EXPECT_NEAR(m(0, 2), 1.0, 1e-12);
    EXPECT_NEAR(m(1, 2), 5.0, 1e-12);
    RecurrenceOptions bad;
    bad.dimension = 0;
    EXPECT_THROW(recurrence_plot(v, bad), ValidationError);
}

TEST(Gaf, HandCase) {
    const std::vector<double> w{1, 0, -1};
    expect_matrix(gramian_angular_summation(w).values, {{1, 0, -1}, {0, -1, 0}, {-1, 0, 1}}, 1e-15);
}

TEST(Gaf, ConstantWindowIsMinusOne) {
    const std::vector<double> w(16, 2.5);
    const auto m = gramian_angular_summation(w);
    for (double v : m.values.values()) EXPECT_EQ(v, -1.0);
}

TEST(Gaf, DualFormsAndOracle) {
    std::mt19937_64 gen(2);
    for (int t = 0; t < 10; ++t) {
        const auto w = oracle::random_window(gen);
        const auto m = gramian_angular_summation(w).values;
        expect_matrix(m, oracle::gaf_angular(w), 1e-10);
        expect_matrix(m, oracle::gaf_algebraic(w), 1e-10);
    }
}

TEST(Gaf, RescaleEndpoints) {
    const auto x = rescale_symmetric(std::vector<double>{3, 5, 4});
    EXPECT_EQ(x, (std::vector<double>{-1, 1, 0}));
}

TEST(Mtf, AlternatingHandCase) {
    const std::vector<double> w{0, 1, 0, 1};
    const MarkovModel model = markov_transition_matrix(w, 2);
    ASSERT_EQ(model.transitions.size(), 2u);
    expect_exact(model.transitions, {{0, 1}, {1, 0}});
    expect_exact(markov_transition_field(w, 2).values, {{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}});
}

TEST(Mtf, IncreasingRamp) {
    std::vector<double> w(10);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(i);
    const auto ref = oracle::markov(w, 2);
    const MarkovModel model = markov_transition_matrix(w, 2);
    // 5 samples per bin: bin 0 -> 0 four times, 0 -> 1 once, bin 1 -> 1 four times.
    expect_exact(model.transitions, {{0.8, 0.2}, {0, 1}});
    expect_exact(model.transitions, ref.w);
    const auto field = markov_transition_field(w, 2).values;
    for (double v : field.values()) EXPECT_TRUE(v == 0.8 || v == 0.2 || v == 0.0 || v == 1.0);
}

TEST(Mtf, RowsSumToOneOrZeroAndMatchOracle) {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 10; ++t) {
        const auto w = oracle::random_window(gen);
        for (int bins : {2, 5, 8}) {
            const MarkovModel model = markov_transition_matrix(w, bins);
            const auto ref = oracle::markov(w, bins);
            EXPECT_EQ(model.edges, ref.edges);
            EXPECT_EQ(model.bins, ref.bins);
            for (std::size_t a = 0; a < model.transitions.size(); ++a) {
                double row = 0;
                for (std::size_t b = 0; b < model.transitions.size(); ++b) row += model.transitions(a, b);
                EXPECT_TRUE(std::fabs(row - 1.0) < 1e-12 || row == 0.0);
            }
            expect_matrix(markov_transition_field(w, bins).values, ref.field, 1e-10);
        }
    }
}

TEST(Mtf, DuplicateEdgesMerged) {
    const std::vector<double> w{0, 0, 0, 0, 0, 0, 1, 2};
    const MarkovModel model = markov_transition_matrix(w, 8);
    for (std::size_t i = 1; i < model.edges.size(); ++i) EXPECT_LT(model.edges[i - 1], model.edges[i]);
    const std::vector<double> flat(10, 1.0);
    const MarkovModel one = markov_transition_matrix(flat, 8);
    EXPECT_EQ(one.edges.size(), 1u);
    EXPECT_EQ(one.transitions(0, 0), 1.0);
    EXPECT_THROW(markov_transition_matrix(w, 1), ValidationError);
}

TEST(Quantize, RangeEndpointsAndRounding) {
    EXPECT_EQ(quantize_value(-1.0, EncoderKind::gaf), 0);
    EXPECT_EQ(quantize_value(1.0, EncoderKind::gaf), 255);
    EXPECT_EQ(quantize_value(0.0, EncoderKind::gaf), 128);  // 127.5 rounds up
    EXPECT_EQ(quantize_value(0.0, EncoderKind::rp), 0);
    EXPECT_EQ(quantize_value(2.0, EncoderKind::rp), 255);
    EXPECT_EQ(quantize_value(0.5, EncoderKind::mtf), 128);
    EXPECT_EQ(quantize_value(1.0, EncoderKind::mtf), 255);
    EXPECT_THROW(quantize_value(2.5, EncoderKind::rp), ValidationError);
    EXPECT_THROW(quantize_value(-0.1, EncoderKind::mtf), ValidationError);
}

TEST(Quantize, ImageReplicatesChannels) {
    const std::vector<double> w{1, 0, -1};
    const EncodedImage img = quantize_to_image(gramian_angular_summation(w));
    EXPECT_EQ(img.height, 3u);
    EXPECT_EQ(img.channels, 3u);
    EXPECT_EQ(img.pixels.size(), 27u);
    EXPECT_EQ(img.at(0, 0), 255);
    EXPECT_EQ(img.at(1, 1), 0);
    EXPECT_EQ(img.at(0, 1), 128);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(img.at(2, 0, c), 0);
}

TEST(Batch, IndependentOfBatchSizeAndThreads) {
    std::mt19937_64 gen(4);
    std::vector<std::vector<double>> windows;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 7; ++i) {
        std::vector<double> w(64);
        for (auto& v : w) v = u(gen);
        windows.push_back(w);
    }
    for (auto kind : {EncoderKind::rp, EncoderKind::gaf, EncoderKind::mtf}) {
        EncoderSettings s;
        s.kind = kind;
        const auto a = encode_batch(windows, s, {1, 1});
        const auto b = encode_batch(windows, s, {3, 1});
        const auto c = encode_batch(windows, s, {2, 4});
        EXPECT_EQ(a, b);
        EXPECT_EQ(a, c);
    }
}

TEST(Batch, EmptyAndNaN) {
    EncoderSettings s;
    EXPECT_TRUE(encode_batch(std::vector<std::vector<double>>{}, s).empty());
    std::vector<std::vector<double>> windows{std::vector<double>(8, 0.0), std::vector<double>(8, 1.0)};
    windows[0][3] = std::numeric_limits<double>::quiet_NaN();
    try {
        encode_batch(windows, s);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("window 0"), std::string::npos);
    }
    windows[0][3] = 0.0;
    windows[1].push_back(1.0);
    EXPECT_THROW(encode_batch(windows, s), ValidationError);
}

TEST(Batch, FromSignalCarriesProvenance) {
    std::vector<double> signal(1024);
    for (std::size_t i = 0; i < signal.size(); ++i) signal[i] = std::sin(0.1 * i);
    std::vector<SegmentWindow> windows{{"r", 0, 256, WindowLabel::preictal, 0u}, {"r", 512, 256, WindowLabel::interictal, {}}};
    EncoderSettings s;
    s.kind = EncoderKind::gaf;
    const auto images = encode_batch(signal, windows, s);
    ASSERT_EQ(images.size(), 2u);
    EXPECT_EQ(images[1].start_sample, 512);
    EXPECT_EQ(images[0].label, WindowLabel::preictal);
    std::vector<double> second(signal.begin() + 512, signal.begin() + 768);
    EXPECT_EQ(images[1], [&] {
        auto img = quantize_to_image(gramian_angular_summation(second));
        img.start_sample = 512;
        return img;
    }());
    windows.push_back({"r", 900, 256, WindowLabel::interictal, {}});
    EXPECT_THROW(encode_batch(signal, windows, s), ValidationError);
}

TEST(ImageSet, RoundTripAndPpm) {
    testing_support::TempDir dir;
    std::mt19937_64 gen(5);
    std::vector<std::vector<double>> windows;
    for (int i = 0; i < 3; ++i) windows.push_back(oracle::random_window(gen, 32));
    EncoderSettings s;
    s.kind = EncoderKind::mtf;
    auto images = encode_batch(windows, s);
    images[1].label = WindowLabel::preictal;
    images[2].start_sample = 77;
    save_image_set(dir / "x.imgset", images, 0xfeedULL);
    std::uint64_t hash = 0;
    EXPECT_EQ(load_image_set(dir / "x.imgset", &hash), images);
    EXPECT_EQ(hash, 0xfeedULL);
    write_ppm(dir / "a.ppm", images[0]);
    const std::string ppm = testing_support::read_text(dir / "a.ppm");
    EXPECT_EQ(ppm.substr(0, 3), "P6\n");
    EXPECT_EQ(ppm.size(), std::string("P6\n32 32\n255\n").size() + 32 * 32 * 3);
}

TEST(Encoder, ParseKind) {
    EXPECT_EQ(parse_encoder_kind("gaf"), EncoderKind::gaf);
    EXPECT_EQ(to_string(EncoderKind::mtf), "mtf");
    EXPECT_THROW(parse_encoder_kind("xyz"), ValidationError);
}
