#include "ictus/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ictus/detail/binary_io.hpp"
#include "ictus/error.hpp"
#include "ictus/parallel.hpp"
#include "ictus/random.hpp"
#include "ictus/text.hpp"

namespace ictus {

LayerShapes LayerShapes::of(const Architecture& a) {
    auto fail = [&](const std::string& why) {
        throw ValidationError("incompatible input dimensions " + std::to_string(a.input_height) + "x" +
                              std::to_string(a.input_width) + ": " + why);
    };
    if (a.downsample == 0 || a.input_channels == 0 || a.conv1_filters == 0 || a.conv2_filters == 0 ||
        a.conv1_kernel == 0 || a.conv2_kernel == 0) {
        fail("zero-sized layer");
    }
    if (a.input_height % a.downsample || a.input_width % a.downsample) fail("not divisible by the downsample factor");
    LayerShapes s{};
    s.in_c = a.input_channels;
    s.in_h = a.input_height / a.downsample;
    s.in_w = a.input_width / a.downsample;
    if (s.in_h < a.conv1_kernel || s.in_w < a.conv1_kernel) fail("smaller than the first kernel");
    s.c1_h = s.in_h - a.conv1_kernel + 1;
    s.c1_w = s.in_w - a.conv1_kernel + 1;
    if (s.c1_h % Architecture::kPool || s.c1_w % Architecture::kPool) fail("first feature map not divisible by pooling");
    s.p1_h = s.c1_h / Architecture::kPool;
    s.p1_w = s.c1_w / Architecture::kPool;
    if (s.p1_h < a.conv2_kernel || s.p1_w < a.conv2_kernel) fail("smaller than the second kernel");
    s.c2_h = s.p1_h - a.conv2_kernel + 1;
    s.c2_w = s.p1_w - a.conv2_kernel + 1;
    if (s.c2_h % Architecture::kPool || s.c2_w % Architecture::kPool) {
        fail("second feature map not divisible by pooling");
    }
    s.p2_h = s.c2_h / Architecture::kPool;
    s.p2_w = s.c2_w / Architecture::kPool;
    s.features = a.conv2_filters * s.p2_h * s.p2_w;
    return s;
}

struct CnnModel::Workspace {
    std::vector<double> a1, p1, a2, p2;
    std::vector<std::uint32_t> arg1, arg2;
    std::array<double, 2> logits{}, probs{};
    // backward scratch
    std::vector<double> d1, dp1, d2, dp2;
};

CnnModel::CnnModel(const Architecture& arch, std::uint64_t seed) : arch_(arch), shapes_(LayerShapes::of(arch)), seed_(seed) {
    const std::size_t k1 = arch.conv1_kernel * arch.conv1_kernel;
    const std::size_t k2 = arch.conv2_kernel * arch.conv2_kernel;
    off_.w1 = 0;
    off_.b1 = off_.w1 + arch.conv1_filters * shapes_.in_c * k1;
    off_.w2 = off_.b1 + arch.conv1_filters;
    off_.b2 = off_.w2 + static_cast<std::size_t>(arch.conv2_filters) * arch.conv1_filters * k2;
    off_.wd = off_.b2 + arch.conv2_filters;
    off_.bd = off_.wd + Architecture::kClasses * shapes_.features;
    off_.total = off_.bd + Architecture::kClasses;
    params_.assign(off_.total, 0.0);
}

CnnModel CnnModel::build(const Architecture& arch, std::uint64_t seed) {
    CnnModel m(arch, seed);
    Rng rng(seed);
    auto fill = [&](std::size_t begin, std::size_t end, double limit) {
        for (std::size_t i = begin; i < end; ++i) m.params_[i] = rng.uniform(-limit, limit);
    };
    const double fan1 = static_cast<double>(m.shapes_.in_c * arch.conv1_kernel * arch.conv1_kernel);
    const double fan2 = static_cast<double>(arch.conv1_filters * arch.conv2_kernel * arch.conv2_kernel);
    const double fan3 = static_cast<double>(m.shapes_.features);
    fill(m.off_.w1, m.off_.b1, std::sqrt(6.0 / fan1));
    fill(m.off_.w2, m.off_.b2, std::sqrt(6.0 / fan2));
    fill(m.off_.wd, m.off_.bd, 1.0 / std::sqrt(fan3));
    return m;
}

std::span<double> CnnModel::dense_parameters() {
    return std::span<double>(params_).subspan(off_.wd, off_.total - off_.wd);
}

std::string CnnModel::describe() const {
    std::ostringstream os;
    os << "input " << arch_.input_height << "x" << arch_.input_width << "x" << arch_.input_channels << " -> avgpool "
       << arch_.downsample << " (" << shapes_.in_h << "x" << shapes_.in_w << ") -> conv " << arch_.conv1_filters << "@"
       << arch_.conv1_kernel << "x" << arch_.conv1_kernel << " relu -> maxpool 2 -> conv " << arch_.conv2_filters
       << "@" << arch_.conv2_kernel << "x" << arch_.conv2_kernel << " relu -> maxpool 2 -> dense " << shapes_.features
       << "->2 -> softmax; " << params_.size() << " parameters";
    return os.str();
}

std::vector<double> CnnModel::prepare(const EncodedImage& image) const {
    if (image.height != arch_.input_height || image.width != arch_.input_width ||
        image.channels != arch_.input_channels) {
        throw ValidationError("image dimensions " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                              "x" + std::to_string(image.channels) + " do not match the model input");
    }
    const std::size_t f = arch_.downsample;
    const std::size_t c_n = shapes_.in_c, h_n = shapes_.in_h, w_n = shapes_.in_w;
    std::vector<std::uint32_t> sums(c_n * h_n * w_n, 0);
    for (std::size_t y = 0; y < image.height; ++y) {
        const std::size_t oy = y / f;
        const std::uint8_t* row = image.pixels.data() + y * image.width * c_n;
        for (std::size_t x = 0; x < image.width; ++x) {
            const std::size_t ox = x / f;
            for (std::size_t c = 0; c < c_n; ++c) sums[(c * h_n + oy) * w_n + ox] += row[x * c_n + c];
        }
    }
    const double scale = 1.0 / (255.0 * static_cast<double>(f * f));
    std::vector<double> out(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) out[i] = sums[i] * scale;
    return out;
}

namespace {

// out[f] = bias[f] + sum_c conv(in[c], w[f][c]), valid padding, stride 1.
void conv_forward(const double* in, std::size_t in_c, std::size_t in_h, std::size_t in_w, const double* w,
                  const double* bias, std::size_t filters, std::size_t k, double* out) {
    const std::size_t out_h = in_h - k + 1, out_w = in_w - k + 1;
    for (std::size_t f = 0; f < filters; ++f) {
        double* o = out + f * out_h * out_w;
        std::fill(o, o + out_h * out_w, bias[f]);
        for (std::size_t c = 0; c < in_c; ++c) {
            const double* plane = in + c * in_h * in_w;
            const double* wk = w + (f * in_c + c) * k * k;
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const double wv = wk[ky * k + kx];
                    for (std::size_t y = 0; y < out_h; ++y) {
                        const double* src = plane + (y + ky) * in_w + kx;
                        double* dst = o + y * out_w;
                        for (std::size_t x = 0; x < out_w; ++x) dst[x] += wv * src[x];
                    }
                }
            }
        }
    }
}

// Gradients of a valid convolution given dL/dout. dw, db accumulate; din (if
// non-null) is overwritten.
void conv_backward(const double* in, std::size_t in_c, std::size_t in_h, std::size_t in_w, const double* w,
                   std::size_t filters, std::size_t k, const double* dout, double* dw, double* db, double* din) {
    const std::size_t out_h = in_h - k + 1, out_w = in_w - k + 1;
    if (din) std::fill(din, din + in_c * in_h * in_w, 0.0);
    for (std::size_t f = 0; f < filters; ++f) {
        const double* g = dout + f * out_h * out_w;
        double bsum = 0.0;
        for (std::size_t i = 0; i < out_h * out_w; ++i) bsum += g[i];
        db[f] += bsum;
        for (std::size_t c = 0; c < in_c; ++c) {
            const double* plane = in + c * in_h * in_w;
            const double* wk = w + (f * in_c + c) * k * k;
            double* dwk = dw + (f * in_c + c) * k * k;
            double* dplane = din ? din + c * in_h * in_w : nullptr;
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    double acc = 0.0;
                    const double wv = wk[ky * k + kx];
                    for (std::size_t y = 0; y < out_h; ++y) {
                        const double* src = plane + (y + ky) * in_w + kx;
                        const double* gy = g + y * out_w;
                        for (std::size_t x = 0; x < out_w; ++x) acc += gy[x] * src[x];
                        if (dplane) {
                            double* dst = dplane + (y + ky) * in_w + kx;
                            for (std::size_t x = 0; x < out_w; ++x) dst[x] += wv * gy[x];
                        }
                    }
                    dwk[ky * k + kx] += acc;
                }
            }
        }
    }
}

void relu(std::vector<double>& v) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
}

// 2x2 max pooling; arg stores the flat source index of each maximum.
void maxpool_forward(const double* in, std::size_t channels, std::size_t h, std::size_t w, double* out,
                     std::uint32_t* arg) {
    const std::size_t oh = h / 2, ow = w / 2;
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                std::size_t best = (c * h + 2 * y) * w + 2 * x;
                for (std::size_t dy = 0; dy < 2; ++dy) {
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        const std::size_t idx = (c * h + 2 * y + dy) * w + 2 * x + dx;
                        if (in[idx] > in[best]) best = idx;
                    }
                }
                const std::size_t o = (c * oh + y) * ow + x;
                out[o] = in[best];
                arg[o] = static_cast<std::uint32_t>(best);
            }
        }
    }
}

std::array<double, 2> softmax(const std::array<double, 2>& z) {
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
    const double s = e0 + e1;
    return {e0 / s, e1 / s};
}

double cross_entropy(const std::array<double, 2>& z, int label) {
    const double m = std::max(z[0], z[1]);
    const double lse = m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m));
    return lse - z[label];
}

}  // namespace

void CnnModel::run_forward(std::span<const double> input, Workspace& ws) const {
    if (input.size() != input_size()) throw ValidationError("input size does not match the model");
    const auto& s = shapes_;
    const double* p = params_.data();
    ws.a1.resize(arch_.conv1_filters * s.c1_h * s.c1_w);
    conv_forward(input.data(), s.in_c, s.in_h, s.in_w, p + off_.w1, p + off_.b1, arch_.conv1_filters,
                 arch_.conv1_kernel, ws.a1.data());
    relu(ws.a1);
    ws.p1.resize(arch_.conv1_filters * s.p1_h * s.p1_w);
    ws.arg1.resize(ws.p1.size());
    maxpool_forward(ws.a1.data(), arch_.conv1_filters, s.c1_h, s.c1_w, ws.p1.data(), ws.arg1.data());
    ws.a2.resize(arch_.conv2_filters * s.c2_h * s.c2_w);
    conv_forward(ws.p1.data(), arch_.conv1_filters, s.p1_h, s.p1_w, p + off_.w2, p + off_.b2, arch_.conv2_filters,
                 arch_.conv2_kernel, ws.a2.data());
    relu(ws.a2);
    ws.p2.resize(s.features);
    ws.arg2.resize(s.features);
    maxpool_forward(ws.a2.data(), arch_.conv2_filters, s.c2_h, s.c2_w, ws.p2.data(), ws.arg2.data());
    for (std::size_t k = 0; k < Architecture::kClasses; ++k) {
        const double* wk = p + off_.wd + k * s.features;
        double z = p[off_.bd + k];
        for (std::size_t i = 0; i < s.features; ++i) z += wk[i] * ws.p2[i];
        ws.logits[k] = z;
    }
    ws.probs = softmax(ws.logits);
}

std::array<double, 2> CnnModel::forward(std::span<const double> input) const {
    Workspace ws;
    run_forward(input, ws);
    return ws.probs;
}

double CnnModel::predict_proba(const EncodedImage& image) const {
    return forward(prepare(image))[kPreictalClass];
}

double CnnModel::loss(std::span<const double> input, int label) const {
    Workspace ws;
    run_forward(input, ws);
    return cross_entropy(ws.logits, label);
}

std::uint64_t CnnModel::activation_pattern(std::span<const double> input) const {
    Workspace ws;
    run_forward(input, ws);
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    for (double v : ws.a1) mix(v > 0.0);
    for (auto v : ws.arg1) mix(v);
    for (double v : ws.a2) mix(v > 0.0);
    for (auto v : ws.arg2) mix(v);
    return h;
}

double CnnModel::loss_and_gradient(std::span<const double> input, int label, std::span<double> grad) const {
    if (label != 0 && label != 1) throw ValidationError("label must be 0 or 1");
    if (grad.size() != params_.size()) throw ValidationError("gradient buffer has the wrong size");
    Workspace ws;
    run_forward(input, ws);
    const auto& s = shapes_;
    const double* p = params_.data();
    std::fill(grad.begin(), grad.end(), 0.0);

    std::array<double, 2> dz{ws.probs[0], ws.probs[1]};
    dz[label] -= 1.0;

    ws.dp2.assign(s.features, 0.0);
    for (std::size_t k = 0; k < Architecture::kClasses; ++k) {
        const double* wk = p + off_.wd + k * s.features;
        double* gk = grad.data() + off_.wd + k * s.features;
        for (std::size_t i = 0; i < s.features; ++i) {
            gk[i] = dz[k] * ws.p2[i];
            ws.dp2[i] += dz[k] * wk[i];
        }
        grad[off_.bd + k] = dz[k];
    }

    ws.d2.assign(ws.a2.size(), 0.0);
    for (std::size_t i = 0; i < s.features; ++i) {
        if (ws.a2[ws.arg2[i]] > 0.0) ws.d2[ws.arg2[i]] += ws.dp2[i];
    }
    ws.dp1.resize(ws.p1.size());
    conv_backward(ws.p1.data(), arch_.conv1_filters, s.p1_h, s.p1_w, p + off_.w2, arch_.conv2_filters,
                  arch_.conv2_kernel, ws.d2.data(), grad.data() + off_.w2, grad.data() + off_.b2, ws.dp1.data());

    ws.d1.assign(ws.a1.size(), 0.0);
    for (std::size_t i = 0; i < ws.p1.size(); ++i) {
        if (ws.a1[ws.arg1[i]] > 0.0) ws.d1[ws.arg1[i]] += ws.dp1[i];
    }
    conv_backward(input.data(), s.in_c, s.in_h, s.in_w, p + off_.w1, arch_.conv1_filters, arch_.conv1_kernel,
                  ws.d1.data(), grad.data() + off_.w1, grad.data() + off_.b1, nullptr);

    return cross_entropy(ws.logits, label);
}

namespace {
constexpr char kModelMagic[8] = {'I', 'C', 'T', 'U', 'S', 'C', 'N', 'N'};
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void CnnModel::save(const std::filesystem::path& path, std::uint64_t config_hash) const {
    using namespace detail;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model " + path.string());
    out.write(kModelMagic, sizeof(kModelMagic));
    write_le(out, kModelVersion);
    for (std::uint32_t v : {arch_.input_height, arch_.input_width, arch_.input_channels, arch_.downsample,
                            arch_.conv1_filters, arch_.conv1_kernel, arch_.conv2_filters, arch_.conv2_kernel}) {
        write_le(out, v);
    }
    write_le(out, seed_);
    write_le(out, config_hash);
    write_le(out, static_cast<std::uint64_t>(params_.size()));
    for (double v : params_) write_f64(out, v);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

CnnModel CnnModel::load(const std::filesystem::path& path, std::uint64_t* config_hash) {
    using namespace detail;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path.string());
    expect_magic(in, kModelMagic, sizeof(kModelMagic), "model");
    if (read_le<std::uint32_t>(in) != kModelVersion) throw ValidationError("unsupported model version");
    Architecture arch;
    for (std::uint32_t* field : {&arch.input_height, &arch.input_width, &arch.input_channels, &arch.downsample,
                                 &arch.conv1_filters, &arch.conv1_kernel, &arch.conv2_filters, &arch.conv2_kernel}) {
        *field = read_le<std::uint32_t>(in);
    }
    const auto seed = read_le<std::uint64_t>(in);
    const auto hash = read_le<std::uint64_t>(in);
    if (config_hash) *config_hash = hash;
    CnnModel m(arch, seed);
    if (read_le<std::uint64_t>(in) != m.params_.size()) {
        throw ValidationError("model parameter count does not match its architecture");
    }
    for (double& v : m.params_) v = read_f64(in);
    return m;
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ValidationError("batch size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("learning rate must be finite and non-negative");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
    if (downsample_factor < 1) throw ValidationError("downsample factor must be >= 1");
}

std::vector<Example> prepare_examples(const CnnModel& model, std::span<const EncodedImage> images, unsigned threads) {
    std::vector<Example> out(images.size());
    parallel_for(images.size(), threads, [&](std::size_t i) {
        out[i].input = model.prepare(images[i]);
        out[i].label = images[i].label == WindowLabel::preictal ? 1 : 0;
    });
    return out;
}

TrainReport train(CnnModel& model, std::span<const Example> examples, const TrainConfig& cfg) {
    cfg.validate();
    if (examples.empty()) throw ValidationError("cannot train on an empty dataset");
    if (cfg.downsample_factor != model.architecture().downsample) {
        throw ValidationError("train config downsample factor does not match the model");
    }
    std::size_t positives = 0;
    for (const auto& ex : examples) {
        if (ex.label != 0 && ex.label != 1) throw ValidationError("example with a label outside {0, 1}");
        if (ex.input.size() != model.input_size()) throw ValidationError("example input size does not match the model");
        positives += static_cast<std::size_t>(ex.label);
    }
    TrainReport report;
    if (2 * positives != examples.size()) {
        report.warnings.push_back("unbalanced training set: " + std::to_string(positives) + " preictal of " +
                                  std::to_string(examples.size()));
    }

    const std::size_t n_params = model.parameter_count();
    std::vector<double> velocity(n_params, 0.0), batch_grad(n_params);
    const std::size_t batch = std::min(cfg.batch_size, examples.size());
    std::vector<std::vector<double>> sample_grads(batch, std::vector<double>(n_params));
    std::vector<double> sample_loss(batch);
    std::vector<char> sample_hit(batch);
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed);

    double best = INFINITY;
    std::size_t stale = 0;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(order.size(), begin + batch);
            const std::size_t m = end - begin;
            parallel_for(m, cfg.threads, [&](std::size_t k) {
                const Example& ex = examples[order[begin + k]];
                sample_loss[k] = model.loss_and_gradient(ex.input, ex.label, sample_grads[k]);
                // Probability of the true class above one half <=> correct.
                sample_hit[k] = sample_loss[k] < std::log(2.0);
            });
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
            for (std::size_t k = 0; k < m; ++k) {
                const auto& g = sample_grads[k];
                for (std::size_t i = 0; i < n_params; ++i) batch_grad[i] += g[i];
                loss_sum += sample_loss[k];
                hits += static_cast<std::size_t>(sample_hit[k]);
            }
            const double inv = 1.0 / static_cast<double>(m);
            auto params = model.parameters();
            for (std::size_t i = 0; i < n_params; ++i) {
                velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * (batch_grad[i] * inv);
                params[i] += velocity[i];
            }
        }
        const double epoch_loss = loss_sum / static_cast<double>(examples.size());
        report.epochs.push_back({epoch + 1, epoch_loss, static_cast<double>(hits) / static_cast<double>(examples.size())});
        if (cfg.early_stop_patience > 0) {
            if (best - epoch_loss < cfg.early_stop_tolerance) {
                if (++stale >= cfg.early_stop_patience) {
                    report.stopped_early = true;
                    break;
                }
            } else {
                stale = 0;
            }
            best = std::min(best, epoch_loss);
        }
    }
    return report;
}

TrainReport train(CnnModel& model, std::span<const EncodedImage> images, const TrainConfig& cfg) {
    const auto examples = prepare_examples(model, images, cfg.threads);
    return train(model, examples, cfg);
}

GradientCheckReport gradient_check(const CnnModel& model, std::span<const double> input, int label, double epsilon,
                                   std::size_t max_coordinates, std::uint64_t seed, bool skip_kinks) {
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    GradientCheckReport report;
    const std::size_t n = model.parameter_count();
    // Random order over all parameters; walk it until enough usable ones.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (n > max_coordinates) {
        Rng rng(seed);
        for (std::size_t i = 0; i + 1 < n; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
    }

    std::vector<double> grad(n);
    model.loss_and_gradient(input, label, grad);
    const std::uint64_t base = skip_kinks ? model.activation_pattern(input) : 0;
    CnnModel probe = model;
    auto params = probe.parameters();
    std::vector<std::pair<std::size_t, std::pair<double, double>>> kept;
    for (std::size_t idx : order) {
        if (kept.size() >= max_coordinates) break;
        const double saved = params[idx];
        params[idx] = saved + epsilon;
        const double up = probe.loss(input, label);
        const bool up_kink = skip_kinks && probe.activation_pattern(input) != base;
        params[idx] = saved - epsilon;
        const double down = probe.loss(input, label);
        const bool down_kink = skip_kinks && probe.activation_pattern(input) != base;
        params[idx] = saved;
        if (up_kink || down_kink) {
            report.kink_crossings.push_back(idx);
            continue;
        }
        kept.push_back({idx, {grad[idx], (up - down) / (2.0 * epsilon)}});
    }
    std::sort(kept.begin(), kept.end());
    for (const auto& [idx, an] : kept) {
        const auto [analytic, numeric] = an;
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        report.coordinates.push_back(idx);
        report.analytic.push_back(analytic);
        report.numeric.push_back(numeric);
        report.max_relative_error = std::max(report.max_relative_error, std::abs(analytic - numeric) / denom);
    }
    std::sort(report.kink_crossings.begin(), report.kink_crossings.end());
    return report;
}

std::vector<ProbabilityStream> score_recording(std::span<const CnnModel* const> models, const Recording& rec,
                                               const EncoderSettings& encoder, double from_s, double to_s,
                                               unsigned threads) {
    if (models.empty()) return {};
    const double fs = rec.sampling_rate_hz;
    const std::int64_t len = window_length_samples(fs);
    const auto total = static_cast<std::int64_t>(rec.samples.size());
    if (total < len) throw ValidationError("recording shorter than one second");
    const auto first = static_cast<std::int64_t>(std::ceil(std::max(0.0, from_s) - 1e-9));
    const double end_s = to_s < 0.0 ? rec.duration_s() : std::min(to_s, rec.duration_s());
    std::int64_t count = 0;
    while ((first + count + 1) * len <= total && static_cast<double>(first + count + 1) <= end_s + 1e-9) ++count;

    std::vector<ProbabilityStream> streams(models.size());
    for (auto& s : streams) {
        s.recording_id = rec.id;
        s.start_time_s = static_cast<double>(first);
        s.values.resize(static_cast<std::size_t>(count));
    }
    const std::span<const double> signal(rec.samples);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
        const auto start = static_cast<std::size_t>((first + static_cast<std::int64_t>(i)) * len);
        const EncodedImage image = quantize_to_image(encode(signal.subspan(start, static_cast<std::size_t>(len)), encoder));
        for (std::size_t m = 0; m < models.size(); ++m) {
            streams[m].values[i] = models[m]->forward(models[m]->prepare(image))[CnnModel::kPreictalClass];
        }
    });
    return streams;
}

ProbabilityStream score_recording(const CnnModel& model, const Recording& rec, const EncoderSettings& encoder,
                                  double from_s, double to_s, unsigned threads) {
    const CnnModel* ptr = &model;
    return score_recording(std::span<const CnnModel* const>(&ptr, 1), rec, encoder, from_s, to_s, threads).front();
}

void save_probability_stream(const ProbabilityStream& stream, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write stream " + path.string());
    out << "# recording=" << stream.recording_id << '\n';
    out << "# source=" << (stream.source == ProbabilityStream::Source::external ? "external" : "internal_cnn") << '\n';
    if (stream.config_hash != 0) out << "# config_hash=" << hex64(stream.config_hash) << '\n';
    out << "second_index,p_preictal\n";
    const auto first = static_cast<long long>(std::llround(stream.start_time_s));
    for (std::size_t i = 0; i < stream.values.size(); ++i) {
        out << first + static_cast<long long>(i) << ',' << format_g17(stream.values[i]) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

ProbabilityStream load_probability_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stream " + path.string());
    ProbabilityStream stream;
    stream.source = ProbabilityStream::Source::external;
    std::string line;
    bool have_first = false;
    long long expected = 0;
    while (std::getline(in, line)) {
        const auto view = trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            const auto body = trim(view.substr(1));
            if (body.starts_with("recording=")) stream.recording_id = std::string(body.substr(10));
            if (body == "source=internal_cnn") stream.source = ProbabilityStream::Source::internal_cnn;
            if (body.starts_with("config_hash=")) stream.config_hash = parse_hex64(body.substr(12));
            continue;
        }
        if (view.starts_with("second_index")) continue;
        const auto cols = split(view, ',');
        if (cols.size() != 2) throw ValidationError("stream rows need second_index,p_preictal: '" + line + "'");
        const long long second = parse_int(cols[0], "second_index");
        const double p = parse_double(cols[1], "p_preictal");
        if (!have_first) {
            stream.start_time_s = static_cast<double>(second);
            expected = second;
            have_first = true;
        }
        if (second != expected) throw ValidationError("gap at " + std::to_string(expected));
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("p_preictal outside [0,1] at second " + std::to_string(second));
        }
        stream.values.push_back(p);
        ++expected;
    }
    if (stream.values.empty()) throw ValidationError("probability stream is empty");
    return stream;
}

}  // namespace ictus
