#include "ictus/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ictus/detail/binary_io.hpp"
#include "ictus/error.hpp"
#include "ictus/parallel.hpp"

namespace ictus {

std::string_view to_string(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::rp: return "rp";
        case EncoderKind::gaf: return "gaf";
        case EncoderKind::mtf: return "mtf";
    }
    return "?";
}

EncoderKind parse_encoder_kind(std::string_view name) {
    if (name == "rp") return EncoderKind::rp;
    if (name == "gaf") return EncoderKind::gaf;
    if (name == "mtf") return EncoderKind::mtf;
    throw ValidationError("unknown encoder kind '" + std::string(name) + "' (expected rp, gaf or mtf)");
}

std::pair<double, double> quantization_range(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::rp: return {0.0, 2.0};
        case EncoderKind::gaf: return {-1.0, 1.0};
        case EncoderKind::mtf: return {0.0, 1.0};
    }
    return {0.0, 1.0};
}

namespace {

// numpy.percentile's default (linear) interpolation on sorted data.
double percentile_sorted(std::span<const double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

EncodedMatrix recurrence_plot(std::span<const double> window, const RecurrenceOptions& options) {
    if (options.dimension < 1 || options.time_delay < 1) {
        throw ValidationError("recurrence plot dimension and time delay must be >= 1");
    }
    if (options.threshold && options.percentage) {
        throw ValidationError("recurrence plot takes a threshold or a percentage, not both");
    }
    const std::size_t span = static_cast<std::size_t>(options.dimension - 1) * options.time_delay;
    if (window.size() <= span) throw ValidationError("window too short for the embedding");
    const std::size_t n = window.size() - span;

    SquareMatrix r(n);
    if (options.dimension == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = std::abs(window[i] - window[j]);
                r(i, j) = d;
                r(j, i) = d;
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double sq = 0.0;
                for (int k = 0; k < options.dimension; ++k) {
                    const double diff = window[i + k * options.time_delay] - window[j + k * options.time_delay];
                    sq += diff * diff;
                }
                r(i, j) = r(j, i) = std::sqrt(sq);
            }
        }
    }

    std::optional<double> threshold = options.threshold;
    if (options.percentage) {
        if (*options.percentage < 0.0 || *options.percentage > 100.0) {
            throw ValidationError("recurrence percentage must be in [0, 100]");
        }
        std::vector<double> sorted(r.values().begin(), r.values().end());
        std::sort(sorted.begin(), sorted.end());
        threshold = percentile_sorted(sorted, *options.percentage / 100.0);
    }
    if (threshold) {
        for (double& v : r.values()) v = v <= *threshold ? 1.0 : 0.0;
    }
    return {EncoderKind::rp, std::move(r)};
}

std::vector<double> rescale_symmetric(std::span<const double> window) {
    std::vector<double> out(window.size(), 0.0);
    if (window.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(window.begin(), window.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (range == 0.0) return out;
    for (std::size_t i = 0; i < window.size(); ++i) {
        out[i] = std::clamp(2.0 * (window[i] - lo) / range - 1.0, -1.0, 1.0);
    }
    return out;
}

EncodedMatrix gramian_angular_summation(std::span<const double> window) {
    const std::vector<double> x = rescale_symmetric(window);
    const std::size_t n = x.size();
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::sqrt(std::max(0.0, 1.0 - x[i] * x[i]));
    SquareMatrix g(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = std::clamp(x[i] * x[j] - s[i] * s[j], -1.0, 1.0);
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return {EncoderKind::gaf, std::move(g)};
}

MarkovModel markov_transition_matrix(std::span<const double> window, int n_bins) {
    if (n_bins < 2) throw ValidationError("markov transition field needs at least 2 bins");
    if (window.empty()) throw ValidationError("markov transition field needs a non-empty window");
    MarkovModel model;
    std::vector<double> sorted(window.begin(), window.end());
    std::sort(sorted.begin(), sorted.end());
    for (int k = 1; k < n_bins; ++k) {
        const double edge = percentile_sorted(sorted, static_cast<double>(k) / n_bins);
        if (model.edges.empty() || edge != model.edges.back()) model.edges.push_back(edge);
    }
    const std::size_t bins = model.edges.size() + 1;
    model.bins.resize(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
        model.bins[i] = static_cast<int>(std::lower_bound(model.edges.begin(), model.edges.end(), window[i]) -
                                         model.edges.begin());
    }
    model.transitions = SquareMatrix(bins);
    for (std::size_t i = 0; i + 1 < window.size(); ++i) {
        model.transitions(model.bins[i], model.bins[i + 1]) += 1.0;
    }
    for (std::size_t a = 0; a < bins; ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < bins; ++b) row += model.transitions(a, b);
        if (row > 0.0) {
            for (std::size_t b = 0; b < bins; ++b) model.transitions(a, b) /= row;
        }
    }
    return model;
}

EncodedMatrix markov_transition_field(std::span<const double> window, int n_bins) {
    const MarkovModel model = markov_transition_matrix(window, n_bins);
    const std::size_t n = window.size();
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = model.transitions(model.bins[i], model.bins[j]);
    }
    return {EncoderKind::mtf, std::move(m)};
}

EncodedMatrix encode(std::span<const double> window, const EncoderSettings& settings) {
    for (double v : window) {
        if (!std::isfinite(v)) throw ValidationError("window contains a non-finite sample");
    }
    switch (settings.kind) {
        case EncoderKind::rp: return recurrence_plot(window, settings.recurrence);
        case EncoderKind::gaf: return gramian_angular_summation(window);
        case EncoderKind::mtf: return markov_transition_field(window, settings.mtf_bins);
    }
    throw ValidationError("unknown encoder kind");
}

std::uint8_t quantize_value(double v, EncoderKind kind) {
    const auto [lo, hi] = quantization_range(kind);
    constexpr double slack = 1e-9;
    if (!(v >= lo - slack && v <= hi + slack)) {
        throw ValidationError("value " + std::to_string(v) + " outside the " + std::string(to_string(kind)) +
                              " quantization range");
    }
    const double scaled = (std::clamp(v, lo, hi) - lo) / (hi - lo) * 255.0;
    return static_cast<std::uint8_t>(std::floor(scaled + 0.5));
}

EncodedImage quantize_to_image(const EncodedMatrix& m) {
    EncodedImage img;
    img.kind = m.kind;
    img.height = img.width = static_cast<std::uint32_t>(m.values.size());
    img.channels = 3;
    img.pixels.resize(static_cast<std::size_t>(img.height) * img.width * 3);
    std::size_t p = 0;
    for (double v : m.values.values()) {
        const std::uint8_t q = quantize_value(v, m.kind);
        img.pixels[p++] = q;
        img.pixels[p++] = q;
        img.pixels[p++] = q;
    }
    return img;
}

namespace {

template <class WindowAt>
std::vector<EncodedImage> encode_indexed(std::size_t count, WindowAt&& window_at, const EncoderSettings& settings,
                                         const BatchOptions& options) {
    std::vector<EncodedImage> out(count);
    const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
    for (std::size_t begin = 0; begin < count; begin += batch) {
        const std::size_t end = std::min(count, begin + batch);
        parallel_for(end - begin, options.threads, [&](std::size_t k) {
            const std::size_t idx = begin + k;
            try {
                out[idx] = window_at(idx, settings);
            } catch (const ValidationError& e) {
                throw ValidationError("window " + std::to_string(idx) + ": " + e.what());
            }
        });
    }
    return out;
}

}  // namespace

std::vector<EncodedImage> encode_batch(std::span<const std::vector<double>> windows, const EncoderSettings& settings,
                                       const BatchOptions& options) {
    if (!windows.empty()) {
        for (const auto& w : windows) {
            if (w.size() != windows.front().size()) throw ValidationError("windows differ in length");
        }
    }
    return encode_indexed(
        windows.size(),
        [&](std::size_t i, const EncoderSettings& s) { return quantize_to_image(encode(windows[i], s)); }, settings,
        options);
}

std::vector<EncodedImage> encode_batch(std::span<const double> signal, std::span<const SegmentWindow> windows,
                                       const EncoderSettings& settings, const BatchOptions& options) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (w.length != windows.front().length) throw ValidationError("windows differ in length");
        if (w.start_sample < 0 || w.start_sample + w.length > static_cast<std::int64_t>(signal.size())) {
            throw ValidationError("window " + std::to_string(i) + " lies outside the signal");
        }
    }
    return encode_indexed(
        windows.size(),
        [&](std::size_t i, const EncoderSettings& s) {
            const auto& w = windows[i];
            EncodedImage img = quantize_to_image(
                encode(signal.subspan(static_cast<std::size_t>(w.start_sample), static_cast<std::size_t>(w.length)), s));
            img.start_sample = w.start_sample;
            img.label = w.label;
            return img;
        },
        settings, options);
}

namespace {
constexpr char kImageMagic[4] = {'I', 'C', 'I', 'M'};
constexpr std::uint8_t kImageVersion = 1;
}  // namespace

void save_image_set(const std::filesystem::path& path, std::span<const EncodedImage> images,
                    std::uint64_t config_hash) {
    using namespace detail;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write image set " + path.string());
    const EncodedImage proto = images.empty() ? EncodedImage{} : images.front();
    for (const auto& img : images) {
        if (img.kind != proto.kind || img.height != proto.height || img.width != proto.width ||
            img.channels != proto.channels) {
            throw ValidationError("image set must be homogeneous in kind and dimensions");
        }
    }
    out.write(kImageMagic, 4);
    write_le(out, kImageVersion);
    write_le(out, static_cast<std::uint8_t>(proto.kind));
    write_le(out, static_cast<std::uint16_t>(proto.channels));
    write_le(out, proto.height);
    write_le(out, proto.width);
    write_le(out, config_hash);
    write_le(out, static_cast<std::uint64_t>(images.size()));
    for (const auto& img : images) {
        write_le(out, static_cast<std::uint64_t>(img.start_sample));
        write_le(out, static_cast<std::uint8_t>(img.label));
        out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<EncodedImage> load_image_set(const std::filesystem::path& path, std::uint64_t* config_hash) {
    using namespace detail;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image set " + path.string());
    expect_magic(in, kImageMagic, 4, "image set");
    if (read_le<std::uint8_t>(in) != kImageVersion) throw ValidationError("unsupported image set version");
    const auto kind_raw = read_le<std::uint8_t>(in);
    if (kind_raw > 2) throw ValidationError("unknown encoder kind in image set");
    EncodedImage proto;
    proto.kind = static_cast<EncoderKind>(kind_raw);
    proto.channels = read_le<std::uint16_t>(in);
    proto.height = read_le<std::uint32_t>(in);
    proto.width = read_le<std::uint32_t>(in);
    const auto hash = read_le<std::uint64_t>(in);
    if (config_hash) *config_hash = hash;
    const auto count = read_le<std::uint64_t>(in);
    const std::size_t bytes = static_cast<std::size_t>(proto.height) * proto.width * proto.channels;
    if (bytes > (std::size_t{1} << 28)) throw ValidationError("implausible image dimensions");
    std::vector<EncodedImage> images;
    images.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        EncodedImage img = proto;
        img.start_sample = static_cast<std::int64_t>(read_le<std::uint64_t>(in));
        const auto label = read_le<std::uint8_t>(in);
        if (label > 1) throw ValidationError("bad label in image set");
        img.label = static_cast<WindowLabel>(label);
        img.pixels.resize(bytes);
        in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(bytes));
        if (!in) throw ValidationError("truncated image set");
        images.push_back(std::move(img));
    }
    return images;
}

void write_ppm(const std::filesystem::path& path, const EncodedImage& image) {
    if (image.channels != 3) throw ValidationError("P6 export needs a 3-channel image");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ictus
