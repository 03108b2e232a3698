#include "ictus/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ictus/error.hpp"
#include "ictus/text.hpp"

namespace ictus {

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += fmt(items[i]);
    }
    return out;
}

template <class T, class F>
std::vector<T> parse_list(std::string_view text, F&& parse) {
    std::vector<T> out;
    for (auto part : split(text, ',')) {
        if (!part.empty()) out.push_back(parse(part));
    }
    return out;
}

std::string opt_text(const std::optional<double>& v, const char* none) { return v ? shortest(*v) : none; }

std::optional<double> parse_opt(std::string_view s, const char* none, std::string_view key) {
    if (trim(s) == none) return std::nullopt;
    return parse_double(s, key);
}

struct Entry {
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, std::string_view, std::string_view)> set;
};

const std::map<std::string, Entry, std::less<>>& table() {
    using C = PipelineConfig;
    using SV = std::string_view;
    static const std::map<std::string, Entry, std::less<>> entries = {
        {"filter.low_hz", {[](const C& c) { return shortest(c.filter.low_hz); },
                           [](C& c, SV v, SV k) { c.filter.low_hz = parse_double(v, k); }}},
        {"filter.high_hz", {[](const C& c) { return shortest(c.filter.high_hz); },
                            [](C& c, SV v, SV k) { c.filter.high_hz = parse_double(v, k); }}},
        {"filter.order", {[](const C& c) { return std::to_string(c.filter.order); },
                          [](C& c, SV v, SV k) { c.filter.order = static_cast<int>(parse_int(v, k)); }}},
        {"filter.notch_hz", {[](const C& c) { return shortest(c.filter.notch_hz); },
                             [](C& c, SV v, SV k) { c.filter.notch_hz = parse_double(v, k); }}},
        {"filter.notch_bandwidth_hz", {[](const C& c) { return shortest(c.filter.notch_bandwidth_hz); },
                                       [](C& c, SV v, SV k) { c.filter.notch_bandwidth_hz = parse_double(v, k); }}},
        {"filter.zero_phase", {[](const C& c) { return std::string(c.filter.zero_phase ? "true" : "false"); },
                               [](C& c, SV v, SV k) { c.filter.zero_phase = parse_bool(v, k); }}},
        {"filter.normalize", {[](const C& c) { return std::string(c.filter.normalize ? "true" : "false"); },
                              [](C& c, SV v, SV k) { c.filter.normalize = parse_bool(v, k); }}},
        {"segment.postictal_minutes", {[](const C& c) { return shortest(c.postictal_minutes); },
                                       [](C& c, SV v, SV k) { c.postictal_minutes = parse_double(v, k); }}},
        {"segment.preictal_minutes",
         {[](const C& c) { return join(c.preictal_minutes, [](int x) { return std::to_string(x); }); },
          [](C& c, SV v, SV k) {
              c.preictal_minutes = parse_list<int>(v, [&](SV s) { return static_cast<int>(parse_int(s, k)); });
          }}},
        {"segment.seed", {[](const C& c) { return std::to_string(c.segment_seed); },
                          [](C& c, SV v, SV k) { c.segment_seed = parse_size(v, k); }}},
        {"segment.max_windows_per_class", {[](const C& c) { return std::to_string(c.max_windows_per_class); },
                                           [](C& c, SV v, SV k) { c.max_windows_per_class = parse_size(v, k); }}},
        {"encoder.kinds",
         {[](const C& c) { return join(c.encoders, [](EncoderKind e) { return std::string(to_string(e)); }); },
          [](C& c, SV v, SV) { c.encoders = parse_list<EncoderKind>(v, parse_encoder_kind); }}},
        {"encoder.mtf_bins", {[](const C& c) { return std::to_string(c.mtf_bins); },
                              [](C& c, SV v, SV k) { c.mtf_bins = static_cast<int>(parse_int(v, k)); }}},
        {"encoder.rp_dimension", {[](const C& c) { return std::to_string(c.recurrence.dimension); },
                                  [](C& c, SV v, SV k) { c.recurrence.dimension = static_cast<int>(parse_int(v, k)); }}},
        {"encoder.rp_time_delay",
         {[](const C& c) { return std::to_string(c.recurrence.time_delay); },
          [](C& c, SV v, SV k) { c.recurrence.time_delay = static_cast<int>(parse_int(v, k)); }}},
        {"encoder.rp_threshold", {[](const C& c) { return opt_text(c.recurrence.threshold, "none"); },
                                  [](C& c, SV v, SV k) { c.recurrence.threshold = parse_opt(v, "none", k); }}},
        {"encoder.rp_percentage", {[](const C& c) { return opt_text(c.recurrence.percentage, "none"); },
                                   [](C& c, SV v, SV k) { c.recurrence.percentage = parse_opt(v, "none", k); }}},
        {"train.batch_size", {[](const C& c) { return std::to_string(c.train.batch_size); },
                              [](C& c, SV v, SV k) { c.train.batch_size = parse_size(v, k); }}},
        {"train.learning_rate", {[](const C& c) { return shortest(c.train.learning_rate); },
                                 [](C& c, SV v, SV k) { c.train.learning_rate = parse_double(v, k); }}},
        {"train.max_epochs", {[](const C& c) { return std::to_string(c.train.max_epochs); },
                              [](C& c, SV v, SV k) { c.train.max_epochs = parse_size(v, k); }}},
        {"train.momentum", {[](const C& c) { return shortest(c.train.momentum); },
                            [](C& c, SV v, SV k) { c.train.momentum = parse_double(v, k); }}},
        {"train.seed", {[](const C& c) { return std::to_string(c.train.seed); },
                        [](C& c, SV v, SV k) { c.train.seed = parse_size(v, k); }}},
        {"train.downsample",
         {[](const C& c) { return std::to_string(c.train.downsample_factor); },
          [](C& c, SV v, SV k) { c.train.downsample_factor = static_cast<std::uint32_t>(parse_size(v, k)); }}},
        {"train.early_stop_tolerance", {[](const C& c) { return shortest(c.train.early_stop_tolerance); },
                                        [](C& c, SV v, SV k) { c.train.early_stop_tolerance = parse_double(v, k); }}},
        {"train.early_stop_patience", {[](const C& c) { return std::to_string(c.train.early_stop_patience); },
                                       [](C& c, SV v, SV k) { c.train.early_stop_patience = parse_size(v, k); }}},
        {"forecast.smoothing_window_s",
         {[](const C& c) { return std::to_string(c.smoothing_window_s); },
          [](C& c, SV v, SV k) { c.smoothing_window_s = static_cast<int>(parse_int(v, k)); }}},
        {"forecast.sph_minutes", {[](const C& c) { return shortest(c.sph_minutes); },
                                  [](C& c, SV v, SV k) { c.sph_minutes = parse_double(v, k); }}},
        {"forecast.sop_minutes", {[](const C& c) { return opt_text(c.sop_minutes, "auto"); },
                                  [](C& c, SV v, SV k) { c.sop_minutes = parse_opt(v, "auto", k); }}},
        {"grid.z", {[](const C& c) { return join(c.grid_z, shortest); },
                    [](C& c, SV v, SV k) { c.grid_z = parse_list<double>(v, [&](SV s) { return parse_double(s, k); }); }}},
        {"grid.y", {[](const C& c) { return join(c.grid_y, shortest); },
                    [](C& c, SV v, SV k) { c.grid_y = parse_list<double>(v, [&](SV s) { return parse_double(s, k); }); }}},
        {"synth.seed", {[](const C& c) { return std::to_string(c.synth_seed); },
                        [](C& c, SV v, SV k) { c.synth_seed = parse_size(v, k); }}},
        {"runtime.threads", {[](const C& c) { return std::to_string(c.threads); },
                             [](C& c, SV v, SV k) {
                                 c.threads = static_cast<unsigned>(parse_size(v, k));
                                 c.train.threads = c.threads;
                             }}},
    };
    return entries;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
    const auto& t = table();
    const auto it = t.find(trim(key));
    if (it == t.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
    it->second.set(*this, trim(value), it->first);
}

std::string PipelineConfig::get(std::string_view key) const {
    const auto& t = table();
    const auto it = t.find(key);
    if (it == t.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
    return it->second.get(*this);
}

std::vector<std::string> PipelineConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [k, e] : table()) out.push_back(k);
    return out;
}

std::string PipelineConfig::to_text() const {
    std::string out;
    for (const auto& [k, e] : table()) {
        // Thread count does not change results and is left out of the hash text.
        if (k == "runtime.threads") continue;
        out += k + " = " + e.get(*this) + "\n";
    }
    return out;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(to_text()); }

void PipelineConfig::validate() const {
    if (filter.order < 2 || filter.order > 8 || filter.order % 2) throw ValidationError("filter.order must be 2, 4, 6 or 8");
    if (!(filter.low_hz > 0.0 && filter.low_hz < filter.high_hz)) throw ValidationError("filter band is invalid");
    if (postictal_minutes < 0.0) throw ValidationError("segment.postictal_minutes must be >= 0");
    if (preictal_minutes.empty()) throw ValidationError("segment.preictal_minutes must not be empty");
    for (int x : preictal_minutes) {
        if (x < 1) throw ValidationError("preictal minutes must be positive");
    }
    if (encoders.empty()) throw ValidationError("encoder.kinds must not be empty");
    if (mtf_bins < 2) throw ValidationError("encoder.mtf_bins must be >= 2");
    train.validate();
    if (smoothing_window_s < 1) throw ValidationError("forecast.smoothing_window_s must be >= 1");
    for (double z : grid_z) {
        if (!(z > 0.0 && z < 1.0)) throw ValidationError("grid.z values must be in (0, 1)");
    }
    for (double y : grid_y) {
        if (!(y > 0.0 && y < 1.0)) throw ValidationError("grid.y values must be in (0, 1)");
    }
    if (grid_z.empty() || grid_y.empty()) throw ValidationError("grid axes must not be empty");
}

EncoderSettings PipelineConfig::encoder_settings(EncoderKind kind) const { return {kind, mtf_bins, recurrence}; }

GridAxes PipelineConfig::grid_axes() const { return {encoders, preictal_minutes, grid_z, grid_y}; }

SearchSettings PipelineConfig::search_settings() const { return {smoothing_window_s, sph_minutes, sop_minutes, threads}; }

ForecastConfig PipelineConfig::forecast_config(int preictal, double z, double y) const {
    ForecastConfig f;
    f.smoothing_window_s = smoothing_window_s;
    f.likelihood_threshold = z;
    f.firing_threshold = y;
    f.preictal_minutes = preictal;
    f.sph_minutes = sph_minutes;
    f.sop_override_minutes = sop_minutes;
    return f;
}

PipelineConfig parse_config(std::string_view text) {
    PipelineConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("config line " + std::to_string(line_no) + " is not 'key = value'");
        }
        cfg.set(line.substr(0, eq), line.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

PipelineConfig repro_config() {
    PipelineConfig cfg;
    cfg.train.downsample_factor = 8;
    cfg.max_windows_per_class = 200;
    return cfg;
}

}  // namespace ictus
