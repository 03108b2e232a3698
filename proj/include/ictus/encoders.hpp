#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ictus/segmentation.hpp"

namespace ictus {

enum class EncoderKind : std::uint8_t { rp = 0, gaf = 1, mtf = 2 };

std::string_view to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

// Dense row-major square matrix.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

struct EncodedMatrix {
    EncoderKind kind = EncoderKind::rp;
    SquareMatrix values;
};

// Fixed per-kind range used for quantization: RP [0,2], GAF [-1,1], MTF [0,1].
std::pair<double, double> quantization_range(EncoderKind kind);

// Defaults: no embedding, no threshold,
// so the plot is the raw distance matrix. Setting `threshold` (absolute
// distance) or `percentage` (percentile of all distances) binarizes it.
struct RecurrenceOptions {
    int dimension = 1;
    int time_delay = 1;
    std::optional<double> threshold;
    std::optional<double> percentage;
};

EncodedMatrix recurrence_plot(std::span<const double> window, const RecurrenceOptions& options = {});

// Min-max rescale to [-1, 1]; a constant window maps to all zeros.
std::vector<double> rescale_symmetric(std::span<const double> window);

// Summation field G[i,j] = cos(phi_i + phi_j) with phi = arccos(rescaled),
// evaluated in the algebraic form x_i x_j - sqrt(1-x_i^2) sqrt(1-x_j^2).
EncodedMatrix gramian_angular_summation(std::span<const double> window);

struct MarkovModel {
    std::vector<double> edges;  // interior quantile edges, duplicates merged
    std::vector<int> bins;      // bin of each sample
    SquareMatrix transitions;   // row-normalized; rows without transitions stay zero
};

// Quantile edges use linear interpolation between order statistics; a sample
// falls in the bin given by the number of edges strictly below it.
MarkovModel markov_transition_matrix(std::span<const double> window, int n_bins = 8);
EncodedMatrix markov_transition_field(std::span<const double> window, int n_bins = 8);

struct EncoderSettings {
    EncoderKind kind = EncoderKind::rp;
    int mtf_bins = 8;
    RecurrenceOptions recurrence;
};

EncodedMatrix encode(std::span<const double> window, const EncoderSettings& settings);

// 8-bit image, grayscale replicated over three interleaved channels (HWC).
struct EncodedImage {
    EncoderKind kind = EncoderKind::rp;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t channels = 3;
    std::vector<std::uint8_t> pixels;
    // Provenance.
    std::int64_t start_sample = 0;
    WindowLabel label = WindowLabel::interictal;

    std::uint8_t at(std::size_t row, std::size_t col, std::size_t channel = 0) const {
        return pixels[(row * width + col) * channels + channel];
    }
    bool operator==(const EncodedImage&) const = default;
};

std::uint8_t quantize_value(double v, EncoderKind kind);
EncodedImage quantize_to_image(const EncodedMatrix& m);

struct BatchOptions {
    std::size_t batch_size = 64;
    unsigned threads = 1;
};

// Order-preserving; output is identical for any batch size or thread count.
// Errors name the offending window index.
std::vector<EncodedImage> encode_batch(std::span<const std::vector<double>> windows, const EncoderSettings& settings,
                                       const BatchOptions& options = {});
std::vector<EncodedImage> encode_batch(std::span<const double> signal, std::span<const SegmentWindow> windows,
                                       const EncoderSettings& settings, const BatchOptions& options = {});

// Image set file: 16-byte header (magic "ICIM", version, kind, channels,
// height, width), config hash, count, then per image start sample, label and
// raw pixels.
void save_image_set(const std::filesystem::path& path, std::span<const EncodedImage> images,
                    std::uint64_t config_hash);
std::vector<EncodedImage> load_image_set(const std::filesystem::path& path, std::uint64_t* config_hash = nullptr);

// Binary portable pixmap (P6).
void write_ppm(const std::filesystem::path& path, const EncodedImage& image);

}  // namespace ictus
