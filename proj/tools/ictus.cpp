// ictus: command-line front end for the forecasting pipeline.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ictus/classifier.hpp"
#include "ictus/config.hpp"
#include "ictus/encoders.hpp"
#include "ictus/error.hpp"
#include "ictus/evaluation.hpp"
#include "ictus/forecast.hpp"
#include "ictus/pipeline.hpp"
#include "ictus/preprocess.hpp"
#include "ictus/random.hpp"
#include "ictus/recording.hpp"
#include "ictus/segmentation.hpp"
#include "ictus/synthgen.hpp"
#include "ictus/text.hpp"

namespace fs = std::filesystem;
using namespace ictus;

namespace {

struct Globals {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<unsigned> threads;
    bool quiet = false;
};

// Flags given on a subcommand, applied on top of --config and --set.
using FlagOverrides = std::vector<std::pair<std::string, std::string>>;

PipelineConfig resolve_config(const Globals& g, const FlagOverrides& flags, PipelineConfig base = {}) {
    PipelineConfig cfg = g.config_path.empty() ? base : load_config(g.config_path);
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
        cfg.set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
    }
    for (const auto& [k, v] : flags) cfg.set(k, v);
    if (g.threads) cfg.set("runtime.threads", std::to_string(*g.threads));
    cfg.validate();
    return cfg;
}

template <class T>
void flag(FlagOverrides& out, const std::string& key, const std::optional<T>& value) {
    if (!value) return;
    if constexpr (std::is_same_v<T, std::string>) {
        out.emplace_back(key, *value);
    } else if constexpr (std::is_floating_point_v<T>) {
        out.emplace_back(key, format_g17(*value));
    } else {
        out.emplace_back(key, std::to_string(*value));
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

SeizureSplit split_for(const Recording& rec, const std::string& split_path) {
    if (!split_path.empty()) {
        SeizureSplit s = load_split(split_path);
        s.validate(rec.seizure_count());
        return s;
    }
    return default_split(rec);
}

fs::path stream_path(const fs::path& dir, EncoderKind kind, int preictal) {
    return dir / ("stream_" + std::string(to_string(kind)) + "_" + std::to_string(preictal) + ".csv");
}

void print_point(std::ostream& out, const std::string& tag, const GridPoint& p) {
    out << tag << ' ' << format_grid_point(p) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ictus: EEG seizure forecasting from imaged signal windows"};
    app.set_version_flag("--version", std::string(ICTUS_VERSION));
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config_path, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--set", g.overrides, "override one config key (key=value)")->take_all();
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
    app.add_flag("-q,--quiet", g.quiet, "no progress output");

    std::function<int()> action;

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "bandpass + notch + normalize a recording");
    struct {
        std::optional<double> low, high, notch, bandwidth;
        std::optional<int> order;
        bool zero_phase = false;
        std::string in, out;
    } fo;
    filter_cmd->add_option("--low", fo.low, "low cut-off (Hz)");
    filter_cmd->add_option("--high", fo.high, "high cut-off (Hz)");
    filter_cmd->add_option("--order", fo.order, "bandpass order");
    filter_cmd->add_option("--notch", fo.notch, "notch centre (Hz)");
    filter_cmd->add_option("--bandwidth", fo.bandwidth, "notch -3 dB bandwidth (Hz)");
    filter_cmd->add_flag("--zero-phase", fo.zero_phase, "forward-backward filtering (non-causal)");
    filter_cmd->add_option("in", fo.in)->required()->check(CLI::ExistingFile);
    filter_cmd->add_option("out", fo.out)->required();
    filter_cmd->callback([&] {
        action = [&] {
            FlagOverrides f;
            flag(f, "filter.low_hz", fo.low);
            flag(f, "filter.high_hz", fo.high);
            flag(f, "filter.order", fo.order);
            flag(f, "filter.notch_hz", fo.notch);
            flag(f, "filter.notch_bandwidth_hz", fo.bandwidth);
            if (fo.zero_phase) f.emplace_back("filter.zero_phase", "true");
            const PipelineConfig cfg = resolve_config(g, f);
            Recording rec = preprocess_recording(load_recording(fo.in), cfg.filter);
            rec.config_hash = cfg.hash();
            save_recording(rec, fo.out, format_for_path(fo.out));
            if (!g.quiet) std::cerr << design_filter(cfg.filter, rec.sampling_rate_hz).description << '\n';
            return 0;
        };
    });

    // segment
    auto* segment_cmd = app.add_subcommand("segment", "label and window a preprocessed recording");
    struct {
        std::optional<int> preictal;
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> max_per_class;
        std::string split, in, out;
    } so;
    segment_cmd->add_option("--preictal-min", so.preictal, "preictal time X (min)")->required();
    segment_cmd->add_option("--seed", so.seed, "balancing seed");
    segment_cmd->add_option("--max-per-class", so.max_per_class, "cap per class (0 = none)");
    segment_cmd->add_option("--split", so.split, "split file; windows come from the training seizures only")
        ->check(CLI::ExistingFile);
    segment_cmd->add_option("in", so.in)->required()->check(CLI::ExistingFile);
    segment_cmd->add_option("out", so.out)->required();
    segment_cmd->callback([&] {
        action = [&] {
            FlagOverrides f;
            flag(f, "segment.seed", so.seed);
            flag(f, "segment.max_windows_per_class", so.max_per_class);
            const PipelineConfig cfg = resolve_config(g, f);
            const Recording rec = load_recording(so.in);
            const int x = *so.preictal;
            if (x <= 0) throw ValidationError("--preictal-min must be positive");
            BalancedSet set;
            if (!so.split.empty()) {
                set = training_windows(rec, split_for(rec, so.split), x, cfg);
            } else {
                const IntervalLabeling lab = label_intervals(rec, x, cfg.postictal_minutes);
                for (const auto& w : lab.warnings) std::cerr << "warning: " << w << '\n';
                const auto pre = window_preictal(lab, rec);
                const auto inter = window_interictal(lab, rec);
                set = balance_classes(pre, inter, derive_seed(cfg.segment_seed, static_cast<std::uint64_t>(x)),
                                      cfg.max_windows_per_class);
            }
            WindowSet out;
            out.recording_path = fs::absolute(so.in).string();
            out.recording_id = rec.id;
            out.config_hash = cfg.hash();
            out.preictal_minutes = x;
            out.window_length = window_length_samples(rec.sampling_rate_hz);
            out.windows = set.preictal;
            out.windows.insert(out.windows.end(), set.interictal.begin(), set.interictal.end());
            save_window_set(so.out, out);
            if (!g.quiet) {
                std::cerr << set.preictal.size() << " preictal + " << set.interictal.size() << " interictal windows\n";
            }
            return 0;
        };
    });

    // encode
    auto* encode_cmd = app.add_subcommand("encode", "turn windows into 8-bit RGB images");
    struct {
        std::optional<std::string> kind;
        std::optional<int> bins;
        std::string recording, ppm_dir, in, out;
    } eo;
    encode_cmd->add_option("--kind", eo.kind, "rp|gaf|mtf")->required();
    encode_cmd->add_option("--bins", eo.bins, "MTF quantile bins");
    encode_cmd->add_option("--recording", eo.recording, "recording (default: the path stored in the windows file)");
    encode_cmd->add_option("--ppm", eo.ppm_dir, "also write every image as P6 into this directory");
    encode_cmd->add_option("in", eo.in)->required()->check(CLI::ExistingFile);
    encode_cmd->add_option("out", eo.out)->required();
    encode_cmd->callback([&] {
        action = [&] {
            const EncoderKind kind = parse_encoder_kind(*eo.kind);
            FlagOverrides f;
            flag(f, "encoder.mtf_bins", eo.bins);
            const PipelineConfig cfg = resolve_config(g, f);
            const WindowSet ws = load_window_set(eo.in);
            const Recording rec = load_recording(eo.recording.empty() ? ws.recording_path : eo.recording);
            const auto images =
                encode_batch(rec.samples, ws.windows, cfg.encoder_settings(kind), {64, cfg.threads});
            save_image_set(eo.out, images, cfg.hash());
            if (!eo.ppm_dir.empty()) {
                fs::create_directories(eo.ppm_dir);
                for (std::size_t i = 0; i < images.size(); ++i) {
                    write_ppm(fs::path(eo.ppm_dir) / (std::string(to_string(kind)) + "_" + std::to_string(i) + ".ppm"),
                              images[i]);
                }
            }
            if (!g.quiet) std::cerr << images.size() << " " << to_string(kind) << " images\n";
            return 0;
        };
    });

    // train
    auto* train_cmd = app.add_subcommand("train", "fit the CNN on an image set");
    struct {
        std::optional<int> epochs, batch, downsample;
        std::optional<double> lr, momentum;
        std::optional<std::uint64_t> seed;
        std::vector<std::string> in;
        std::string out;
    } to;
    train_cmd->add_option("--epochs", to.epochs, "maximum epochs");
    train_cmd->add_option("--batch", to.batch, "mini-batch size");
    train_cmd->add_option("--lr", to.lr, "learning rate");
    train_cmd->add_option("--momentum", to.momentum, "momentum");
    train_cmd->add_option("--downsample", to.downsample, "average-pool factor before the first conv");
    train_cmd->add_option("--seed", to.seed, "init and shuffle seed");
    train_cmd->add_option("-o,--out", to.out, "model file")->required();
    train_cmd->add_option("in", to.in, "image set(s)")->required()->check(CLI::ExistingFile);
    train_cmd->callback([&] {
        action = [&] {
            FlagOverrides f;
            flag(f, "train.max_epochs", to.epochs);
            flag(f, "train.batch_size", to.batch);
            flag(f, "train.learning_rate", to.lr);
            flag(f, "train.momentum", to.momentum);
            flag(f, "train.downsample", to.downsample);
            flag(f, "train.seed", to.seed);
            const PipelineConfig cfg = resolve_config(g, f);
            std::vector<EncodedImage> images;
            for (const auto& p : to.in) {
                auto part = load_image_set(p);
                images.insert(images.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
            }
            if (images.empty()) throw ValidationError("no training images");
            Architecture arch;
            arch.input_height = images.front().height;
            arch.input_width = images.front().width;
            arch.input_channels = images.front().channels;
            arch.downsample = cfg.train.downsample_factor;
            CnnModel model = CnnModel::build(arch, cfg.train.seed);
            TrainConfig tc = cfg.train;
            tc.threads = cfg.threads;
            const TrainReport report = train(model, images, tc);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
            if (!g.quiet) {
                for (std::size_t e = 0; e < report.epochs.size(); ++e) {
                    std::cerr << "epoch " << e + 1 << " loss " << format_fixed(report.epochs[e].loss, 6) << " acc "
                              << format_fixed(report.epochs[e].accuracy, 4) << '\n';
                }
            }
            model.save(to.out, cfg.hash());
            return 0;
        };
    });

    // score
    auto* score_cmd = app.add_subcommand("score", "per-second preictal probabilities for a recording");
    struct {
        std::string model, kind = "rp", in, out;
        std::optional<int> bins;
        double from = 0.0, to = -1.0;
    } sco;
    score_cmd->add_option("-m,--model", sco.model, "model file")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--kind", sco.kind, "encoder the model was trained on (rp|gaf|mtf)");
    score_cmd->add_option("--bins", sco.bins, "MTF quantile bins");
    score_cmd->add_option("--from", sco.from, "first second to score");
    score_cmd->add_option("--to", sco.to, "end second (default: end of recording)");
    score_cmd->add_option("in", sco.in, "preprocessed recording")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("out", sco.out, "stream CSV")->required();
    score_cmd->callback([&] {
        action = [&] {
            const EncoderKind kind = parse_encoder_kind(sco.kind);
            FlagOverrides f;
            flag(f, "encoder.mtf_bins", sco.bins);
            const PipelineConfig cfg = resolve_config(g, f);
            const CnnModel model = CnnModel::load(sco.model);
            const Recording rec = load_recording(sco.in);
            ProbabilityStream stream =
                score_recording(model, rec, cfg.encoder_settings(kind), sco.from, sco.to, cfg.threads);
            stream.config_hash = cfg.hash();
            save_probability_stream(stream, sco.out);
            return 0;
        };
    });

    // forecast
    auto* forecast_cmd = app.add_subcommand("forecast", "alarms from a probability stream");
    struct {
        double z = 0.5, y = 0.5;
        std::optional<int> preictal, smoothing;
        std::optional<double> sph;
        std::optional<std::string> sop;
        std::string in, out;
    } fco;
    forecast_cmd->add_option("--Z", fco.z, "likelihood threshold")->required();
    forecast_cmd->add_option("--Y", fco.y, "firing-power threshold")->required();
    forecast_cmd->add_option("--preictal-min", fco.preictal, "preictal time X (min)")->required();
    forecast_cmd->add_option("--smoothing", fco.smoothing, "likelihood window (s)");
    forecast_cmd->add_option("--sph", fco.sph, "seizure prediction horizon (min)");
    forecast_cmd->add_option("--sop", fco.sop, "seizure occurrence period (min, or auto)");
    forecast_cmd->add_option("in", fco.in, "stream CSV")->required()->check(CLI::ExistingFile);
    forecast_cmd->add_option("out", fco.out, "alarms CSV")->required();
    forecast_cmd->callback([&] {
        action = [&] {
            FlagOverrides f;
            flag(f, "forecast.smoothing_window_s", fco.smoothing);
            flag(f, "forecast.sph_minutes", fco.sph);
            flag(f, "forecast.sop_minutes", fco.sop);
            const PipelineConfig cfg = resolve_config(g, f);
            const ForecastConfig fc = cfg.forecast_config(*fco.preictal, fco.z, fco.y);
            const ForecastTrace trace = run_forecast(load_probability_stream(fco.in), fc);
            auto out = open_out(fco.out);
            out << "# config_hash=" << hex64(cfg.hash()) << '\n';
            out << "# Z=" << format_g17(fc.likelihood_threshold) << " Y=" << format_g17(fc.firing_threshold)
                << " preictal_min=" << fc.preictal_minutes << " refractory_s=" << format_g17(fc.refractory_s())
                << '\n';
            out << "time_s,fp_value\n";
            for (const auto& a : trace.alarms) out << format_g17(a.time_s) << ',' << format_g17(a.fp_value) << '\n';
            if (!out) throw IoError("write failed: " + fco.out);
            if (!g.quiet) std::cerr << trace.alarms.size() << " alarms\n";
            return 0;
        };
    });

    // search
    auto* search_cmd = app.add_subcommand("search", "threshold grid search over scored streams");
    struct {
        std::optional<std::string> encoders, preictal;
        std::string streams, split, recording, out;
    } seo;
    search_cmd->add_option("--encoders", seo.encoders, "comma list of rp,gaf,mtf");
    search_cmd->add_option("--preictal", seo.preictal, "comma list of preictal minutes");
    search_cmd->add_option("--streams", seo.streams, "directory holding stream_<encoder>_<X>.csv")
        ->required()
        ->check(CLI::ExistingDirectory);
    search_cmd->add_option("--split", seo.split, "split file (default: earliest two thirds train)")
        ->check(CLI::ExistingFile);
    search_cmd->add_option("recording", seo.recording, "annotated recording")->required()->check(CLI::ExistingFile);
    search_cmd->add_option("out", seo.out, "report CSV")->required();
    search_cmd->callback([&] {
        action = [&] {
            FlagOverrides f;
            flag(f, "encoder.kinds", seo.encoders);
            flag(f, "segment.preictal_minutes", seo.preictal);
            const PipelineConfig cfg = resolve_config(g, f);
            const Recording rec = load_recording(seo.recording);
            const SeizureSplit split = split_for(rec, seo.split);
            std::vector<StreamCase> cases;
            for (EncoderKind kind : cfg.encoders) {
                for (int x : cfg.preictal_minutes) {
                    StreamCase sc;
                    sc.encoder = kind;
                    sc.preictal_minutes = x;
                    sc.stream = load_probability_stream(stream_path(seo.streams, kind, x));
                    sc.context = make_evaluation_context(rec, split, x, cfg.postictal_minutes);
                    cases.push_back(std::move(sc));
                }
            }
            const SearchResult result = grid_search(cases, cfg.grid_axes(), cfg.search_settings());
            auto out = open_out(seo.out);
            const std::vector<std::string> meta{"config_hash=" + hex64(cfg.hash()),
                                                "fpr_denominator=interictal hours of the test blocks",
                                                "refractory=SPH+SOP after each alarm; thresholds strict (>)"};
            write_report_csv(out, result, rec.id, meta);
            if (!out) throw IoError("write failed: " + seo.out);
            print_point(std::cout, "best", result.best);
            for (EncoderKind kind : cfg.encoders) {
                if (auto p = result.best_for(kind)) print_point(std::cout, "best[" + std::string(to_string(kind)) + "]", *p);
            }
            return 0;
        };
    });

    // report
    auto* report_cmd = app.add_subcommand("report", "per-second likelihood and firing-power trace");
    struct {
        double z = 0.5, y = 0.5;
        std::optional<int> preictal;
        std::string in, out;
    } ro;
    report_cmd->add_option("--Z", ro.z, "likelihood threshold")->required();
    report_cmd->add_option("--Y", ro.y, "firing-power threshold")->required();
    report_cmd->add_option("--preictal-min", ro.preictal, "preictal time X (min)")->required();
    report_cmd->add_option("in", ro.in, "stream CSV")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("out", ro.out, "trace CSV")->required();
    report_cmd->callback([&] {
        action = [&] {
            const PipelineConfig cfg = resolve_config(g, {});
            const ForecastConfig fc = cfg.forecast_config(*ro.preictal, ro.z, ro.y);
            const ProbabilityStream stream = load_probability_stream(ro.in);
            const ForecastTrace trace = run_forecast(stream, fc);
            auto out = open_out(ro.out);
            out << "# config_hash=" << hex64(cfg.hash()) << '\n';
            out << "time_s,p_preictal,likelihood,binary,firing_power,alarm\n";
            std::size_t next_alarm = 0;
            for (std::size_t i = 0; i < stream.values.size(); ++i) {
                const double t = stream.time_available(i);
                out << format_g17(t) << ',' << format_g17(stream.values[i]) << ',';
                const auto li = static_cast<long long>(std::llround(t - trace.likelihood.first_time_s));
                if (li >= 0 && static_cast<std::size_t>(li) < trace.likelihood.size()) {
                    out << format_g17(trace.likelihood.values[li]) << ','
                        << static_cast<int>(trace.binary.values[li]);
                } else {
                    out << ',';
                }
                out << ',';
                const auto fi = static_cast<long long>(std::llround(t - trace.firing_power.first_time_s));
                if (fi >= 0 && static_cast<std::size_t>(fi) < trace.firing_power.size()) {
                    out << format_g17(trace.firing_power.values[fi]);
                }
                int alarm = 0;
                if (next_alarm < trace.alarms.size() && trace.alarms[next_alarm].time_s == t) {
                    alarm = 1;
                    ++next_alarm;
                }
                out << ',' << alarm << '\n';
            }
            if (!out) throw IoError("write failed: " + ro.out);
            return 0;
        };
    });

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "write the seeded synthetic benchmark");
    struct {
        std::optional<std::uint64_t> seed;
        std::string out = ".";
        bool csv = false;
    } syo;
    synth_cmd->add_option("--seed", syo.seed, "generator seed");
    synth_cmd->add_option("--out", syo.out, "output directory");
    synth_cmd->add_flag("--csv", syo.csv, "write recordings as CSV instead of binary");
    synth_cmd->callback([&] {
        action = [&] {
            FlagOverrides f;
            flag(f, "synth.seed", syo.seed);
            const PipelineConfig cfg = resolve_config(g, f);
            fs::create_directories(syo.out);
            BenchmarkSuite suite = make_benchmark_suite(cfg.synth_seed);
            for (std::size_t i = 0; i < suite.recordings.size(); ++i) {
                Recording& rec = suite.recordings[i];
                rec.config_hash = cfg.hash();
                const fs::path base = fs::path(syo.out) / rec.id;
                const fs::path rec_path = base.string() + (syo.csv ? ".csv" : ".rec");
                save_recording(rec, rec_path, syo.csv ? RecordingFormat::csv : RecordingFormat::bin);
                save_split(suite.splits[i], base.string() + ".split");
                std::cout << rec_path.string() << '\n';
            }
            return 0;
        };
    });

    // repro
    auto* repro_cmd = app.add_subcommand("repro", "synth -> filter -> segment -> encode -> train -> score -> search");
    struct {
        std::optional<std::uint64_t> seed;
        std::string out;
    } rpo;
    repro_cmd->add_option("--seed", rpo.seed, "synthetic suite seed");
    repro_cmd->add_option("--out", rpo.out, "directory for report.csv and config.txt");
    repro_cmd->callback([&] {
        action = [&] {
            FlagOverrides f;
            flag(f, "synth.seed", rpo.seed);
            const PipelineConfig cfg = resolve_config(g, f, repro_config());
            const PipelineResult result = run_repro(cfg, g.quiet ? nullptr : &std::cerr);
            if (!rpo.out.empty()) {
                fs::create_directories(rpo.out);
                auto report = open_out(fs::path(rpo.out) / "report.csv");
                report << result.report_csv;
                auto config = open_out(fs::path(rpo.out) / "config.txt");
                config << cfg.to_text();
                if (!report || !config) throw IoError("write failed in " + rpo.out);
            } else {
                std::cout << result.report_csv;
            }
            std::cout << result.summary;
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return action ? action() : 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        // Missing or malformed input files are the caller's problem too.
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
