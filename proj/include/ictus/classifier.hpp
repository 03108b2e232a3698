#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ictus/encoders.hpp"
#include "ictus/recording.hpp"

namespace ictus {

// Compact two-class CNN:
//   average-pool downsample -> conv(k1) ReLU -> maxpool 2 -> conv(k2) ReLU
//   -> maxpool 2 -> fully connected (2) -> softmax
struct Architecture {
    std::uint32_t input_height = 256;
    std::uint32_t input_width = 256;
    std::uint32_t input_channels = 3;
    std::uint32_t downsample = 4;
    std::uint32_t conv1_filters = 8;
    std::uint32_t conv1_kernel = 5;
    std::uint32_t conv2_filters = 16;
    std::uint32_t conv2_kernel = 3;

    static constexpr std::uint32_t kPool = 2;
    static constexpr std::uint32_t kClasses = 2;

    bool operator==(const Architecture&) const = default;
};

// Derived layer geometry; throws ValidationError for incompatible dimensions.
struct LayerShapes {
    std::size_t in_h, in_w, in_c;        // after downsampling
    std::size_t c1_h, c1_w, p1_h, p1_w;  // conv1 output and its pooled size
    std::size_t c2_h, c2_w, p2_h, p2_w;
    std::size_t features;                // flattened input of the dense layer

    static LayerShapes of(const Architecture& arch);
};

class CnnModel {
public:
    static constexpr int kPreictalClass = 1;

    // Seeded uniform fan-in initialization (He-uniform for the convolutions,
    // 1/sqrt(fan_in) for the dense layer), zero biases.
    static CnnModel build(const Architecture& arch, std::uint64_t seed);

    const Architecture& architecture() const { return arch_; }
    const LayerShapes& shapes() const { return shapes_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::span<const double> parameters() const { return params_; }
    std::span<double> parameters() { return params_; }
    std::span<double> dense_parameters();  // weights then biases of the last layer
    std::string describe() const;

    // Pixels scaled to [0,1] and average-pooled; planar CHW layout.
    std::vector<double> prepare(const EncodedImage& image) const;
    std::size_t input_size() const { return shapes_.in_c * shapes_.in_h * shapes_.in_w; }

    std::array<double, 2> forward(std::span<const double> input) const;
    double predict_proba(const EncodedImage& image) const;

    // Cross-entropy loss of one example; the gradient is written to `grad`
    // (overwritten, size parameter_count()).
    double loss_and_gradient(std::span<const double> input, int label, std::span<double> grad) const;
    double loss(std::span<const double> input, int label) const;
    // Hash of which units pass each ReLU and which input wins each max-pool.
    // The loss is smooth in the parameters only while this stays fixed.
    std::uint64_t activation_pattern(std::span<const double> input) const;

    void save(const std::filesystem::path& path, std::uint64_t config_hash = 0) const;
    static CnnModel load(const std::filesystem::path& path, std::uint64_t* config_hash = nullptr);

    bool operator==(const CnnModel& other) const { return arch_ == other.arch_ && params_ == other.params_; }

private:
    struct Offsets {
        std::size_t w1, b1, w2, b2, wd, bd, total;
    };
    struct Workspace;

    CnnModel(const Architecture& arch, std::uint64_t seed);
    void run_forward(std::span<const double> input, Workspace& ws) const;

    Architecture arch_;
    LayerShapes shapes_{};
    Offsets off_{};
    std::uint64_t seed_ = 0;
    std::vector<double> params_;
};

struct TrainConfig {
    std::size_t batch_size = 64;
    double learning_rate = 0.001;
    std::size_t max_epochs = 50;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    std::uint32_t downsample_factor = 4;
    // Stop once the epoch loss has improved by less than the tolerance for
    // `early_stop_patience` consecutive epochs. Patience 0 disables.
    double early_stop_tolerance = 1e-4;
    std::size_t early_stop_patience = 5;
    unsigned threads = 1;

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    bool stopped_early = false;
    std::vector<std::string> warnings;
};

struct Example {
    std::vector<double> input;  // CnnModel::prepare output
    int label = 0;              // 1 = preictal
};

std::vector<Example> prepare_examples(const CnnModel& model, std::span<const EncodedImage> images,
                                      unsigned threads = 1);

// Mini-batch gradient descent with momentum on the mean cross-entropy.
// Batch gradients are summed in example order, so results are bit-identical
// for any thread count.
TrainReport train(CnnModel& model, std::span<const Example> examples, const TrainConfig& cfg);
TrainReport train(CnnModel& model, std::span<const EncodedImage> images, const TrainConfig& cfg);

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::vector<std::size_t> coordinates;
    // Coordinates whose +/-epsilon probe crossed a ReLU or max-pool switch.
    // The loss has no derivative to compare against there, so each one is
    // replaced by another draw.
    std::vector<std::size_t> kink_crossings;
    std::vector<double> analytic;
    std::vector<double> numeric;
};

// Central finite differences on up to `max_coordinates` parameters (all of
// them when the model is smaller). Relative error is
// |a - n| / max(|a|, |n|, 1e-8). Set `skip_kinks` to false to compare at
// every drawn coordinate regardless of activation switches.
GradientCheckReport gradient_check(const CnnModel& model, std::span<const double> input, int label, double epsilon,
                                   std::size_t max_coordinates = 200, std::uint64_t seed = 0,
                                   bool skip_kinks = true);

struct ProbabilityStream {
    enum class Source { internal_cnn, external };

    std::string recording_id;
    // values[i] scores the window [start_time_s + i, start_time_s + i + 1);
    // it becomes available at the end of that window.
    double start_time_s = 0.0;
    std::vector<double> values;
    Source source = Source::internal_cnn;
    std::uint64_t config_hash = 0;

    double time_available(std::size_t i) const { return start_time_s + static_cast<double>(i) + 1.0; }
    bool operator==(const ProbabilityStream&) const = default;
};

// Non-overlapping 1 s windows covering [from_s, to_s) (to_s < 0 means the end
// of the recording), scored by several models sharing one encoding pass.
std::vector<ProbabilityStream> score_recording(std::span<const CnnModel* const> models, const Recording& rec,
                                               const EncoderSettings& encoder, double from_s = 0.0,
                                               double to_s = -1.0, unsigned threads = 1);
ProbabilityStream score_recording(const CnnModel& model, const Recording& rec, const EncoderSettings& encoder,
                                  double from_s = 0.0, double to_s = -1.0, unsigned threads = 1);

// CSV: "second_index,p_preictal" rows, contiguous seconds, p in [0,1].
void save_probability_stream(const ProbabilityStream& stream, const std::filesystem::path& path);
ProbabilityStream load_probability_stream(const std::filesystem::path& path);

}  // namespace ictus
