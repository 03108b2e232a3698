#include "ictus/pipeline.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

#include "ictus/classifier.hpp"
#include "ictus/error.hpp"
#include "ictus/preprocess.hpp"
#include "ictus/random.hpp"
#include "ictus/synthgen.hpp"
#include "ictus/text.hpp"

namespace ictus {

namespace {

bool in_train_block(const SegmentWindow& w, const std::vector<Interval>& blocks, const std::vector<char>& is_train,
                    double fs) {
    const double t = static_cast<double>(w.start_sample) / fs;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (blocks[k].contains(t)) return is_train[k] != 0;
    }
    return false;
}

}  // namespace

BalancedSet training_windows(const Recording& preprocessed, const SeizureSplit& split, int preictal_minutes,
                             const PipelineConfig& cfg) {
    split.validate(preprocessed.seizure_count());
    const IntervalLabeling lab = label_intervals(preprocessed, preictal_minutes, cfg.postictal_minutes);
    const auto blocks = seizure_blocks(preprocessed, cfg.postictal_minutes);
    std::vector<char> is_train(blocks.size(), 0);
    for (std::size_t k : split.train_indices) is_train[k] = 1;
    const double fs = preprocessed.sampling_rate_hz;
    auto keep = [&](std::vector<SegmentWindow> windows) {
        std::erase_if(windows, [&](const SegmentWindow& w) { return !in_train_block(w, blocks, is_train, fs); });
        return windows;
    };
    const auto pre = keep(window_preictal(lab, preprocessed));
    const auto inter = keep(window_interictal(lab, preprocessed));
    return balance_classes(pre, inter, derive_seed(cfg.segment_seed, static_cast<std::uint64_t>(preictal_minutes)),
                           cfg.max_windows_per_class);
}

double scoring_start_s(const Recording& rec, const SeizureSplit& split, const PipelineConfig& cfg) {
    const auto blocks = seizure_blocks(rec, cfg.postictal_minutes);
    double first = rec.duration_s();
    for (std::size_t k : split.test_indices) first = std::min(first, blocks[k].begin_s);
    const int longest = *std::max_element(cfg.preictal_minutes.begin(), cfg.preictal_minutes.end());
    const double warmup = 60.0 * longest + cfg.smoothing_window_s;
    return std::max(0.0, first - warmup);
}

std::string format_grid_point(const GridPoint& p) {
    std::ostringstream os;
    os << "encoder=" << to_string(p.encoder) << " preictal_min=" << p.preictal_minutes
       << " Z=" << format_fixed(p.z, 2) << " Y=" << format_fixed(p.y, 2) << " SE=" << format_fixed(p.se, 3)
       << " FPR_h=" << format_fixed(p.fpr_per_h, 3) << " TP=" << p.counts.tp << " FN=" << p.counts.fn
       << " FP=" << p.counts.fp;
    return os.str();
}

PipelineResult run_pipeline(const Recording& raw, const SeizureSplit& split, const PipelineConfig& cfg,
                            std::ostream* log) {
    cfg.validate();
    split.validate(raw.seizure_count());
    PipelineResult result;
    result.config_hash = cfg.hash();
    auto say = [&](const std::string& msg) {
        if (log) *log << msg << std::endl;
    };

    const Recording rec = preprocess_recording(raw, cfg.filter);
    say("preprocessed " + rec.id + ": " + format_fixed(rec.duration_s() / 3600.0, 2) + " h, " +
        std::to_string(rec.seizure_count()) + " seizures");

    Architecture arch;
    arch.input_height = arch.input_width = static_cast<std::uint32_t>(window_length_samples(rec.sampling_rate_hz));
    arch.downsample = cfg.train.downsample_factor;

    // models[e][x]
    std::vector<std::vector<std::unique_ptr<CnnModel>>> models(cfg.encoders.size());
    for (std::size_t xi = 0; xi < cfg.preictal_minutes.size(); ++xi) {
        const int x = cfg.preictal_minutes[xi];
        const BalancedSet balanced = training_windows(rec, split, x, cfg);
        std::vector<SegmentWindow> windows = balanced.preictal;
        windows.insert(windows.end(), balanced.interictal.begin(), balanced.interictal.end());
        for (std::size_t ei = 0; ei < cfg.encoders.size(); ++ei) {
            const EncoderKind kind = cfg.encoders[ei];
            const auto images = encode_batch(rec.samples, windows, cfg.encoder_settings(kind), {64, cfg.threads});
            const std::uint64_t model_seed =
                derive_seed(cfg.train.seed, static_cast<std::uint64_t>(ei) * 1000 + static_cast<std::uint64_t>(x));
            auto model = std::make_unique<CnnModel>(CnnModel::build(arch, model_seed));
            TrainConfig tc = cfg.train;
            tc.seed = derive_seed(model_seed, 1);
            tc.threads = cfg.threads;
            const auto examples = prepare_examples(*model, images, cfg.threads);
            const TrainReport report = train(*model, examples, tc);
            ModelSummary ms;
            ms.encoder = kind;
            ms.preictal_minutes = x;
            ms.train_windows = windows.size();
            ms.epochs = report.epochs.size();
            ms.final_loss = report.epochs.back().loss;
            ms.final_accuracy = report.epochs.back().accuracy;
            ms.stopped_early = report.stopped_early;
            result.models.push_back(ms);
            say("trained " + std::string(to_string(kind)) + " X=" + std::to_string(x) + ": " +
                std::to_string(windows.size()) + " windows, " + std::to_string(ms.epochs) +
                " epochs, loss " + format_fixed(ms.final_loss, 4) + ", acc " + format_fixed(ms.final_accuracy, 3));
            models[ei].push_back(std::move(model));
        }
    }

    const double from = scoring_start_s(rec, split, cfg);
    std::vector<StreamCase> cases;
    for (std::size_t ei = 0; ei < cfg.encoders.size(); ++ei) {
        std::vector<const CnnModel*> ptrs;
        for (const auto& m : models[ei]) ptrs.push_back(m.get());
        auto streams = score_recording(ptrs, rec, cfg.encoder_settings(cfg.encoders[ei]), from, -1.0, cfg.threads);
        say("scored " + std::string(to_string(cfg.encoders[ei])) + ": " + std::to_string(streams.front().values.size()) +
            " s from t=" + format_fixed(from, 0));
        for (std::size_t xi = 0; xi < cfg.preictal_minutes.size(); ++xi) {
            StreamCase sc;
            sc.encoder = cfg.encoders[ei];
            sc.preictal_minutes = cfg.preictal_minutes[xi];
            sc.stream = std::move(streams[xi]);
            sc.context = make_evaluation_context(rec, split, sc.preictal_minutes, cfg.postictal_minutes);
            cases.push_back(std::move(sc));
        }
    }

    result.search = grid_search(cases, cfg.grid_axes(), cfg.search_settings());
    result.cases = std::move(cases);

    std::vector<std::string> meta;
    meta.push_back("config_hash=" + hex64(result.config_hash));
    meta.push_back("recording=" + rec.id + " channel=" + rec.channel_label);
    meta.push_back("filter=" + design_filter(cfg.filter, rec.sampling_rate_hz).description +
                   (cfg.filter.zero_phase ? " zero-phase" : " causal"));
    meta.push_back("fpr_denominator=interictal hours of the test blocks");
    meta.push_back("refractory=SPH+SOP after each alarm; thresholds strict (>)");
    meta.push_back("postictal_buffer_min=" + format_g17(cfg.postictal_minutes));
    {
        std::string train_ids, test_ids;
        for (auto k : split.train_indices) train_ids += (train_ids.empty() ? "" : ",") + std::to_string(k);
        for (auto k : split.test_indices) test_ids += (test_ids.empty() ? "" : ",") + std::to_string(k);
        meta.push_back("split train=" + train_ids + " test=" + test_ids);
    }
    for (const auto& ms : result.models) {
        meta.push_back("model " + std::string(to_string(ms.encoder)) + " X=" + std::to_string(ms.preictal_minutes) +
                       " windows=" + std::to_string(ms.train_windows) + " epochs=" + std::to_string(ms.epochs) +
                       " loss=" + format_fixed(ms.final_loss, 6) + " acc=" + format_fixed(ms.final_accuracy, 4) +
                       (ms.stopped_early ? " early_stop" : ""));
    }
    std::ostringstream report;
    write_report_csv(report, result.search, rec.id, meta);
    result.report_csv = report.str();

    std::ostringstream summary;
    summary << "config_hash=" << hex64(result.config_hash) << '\n';
    summary << "best " << format_grid_point(result.search.best) << '\n';
    for (EncoderKind kind : cfg.encoders) {
        if (auto p = result.search.best_for(kind)) summary << "best[" << to_string(kind) << "] " << format_grid_point(*p) << '\n';
    }
    result.summary = summary.str();
    return result;
}

PipelineResult run_repro(const PipelineConfig& cfg, std::ostream* log) {
    const BenchmarkSuite suite = make_benchmark_suite(cfg.synth_seed);
    return run_pipeline(suite.recordings.front(), suite.splits.front(), cfg, log);
}

}  // namespace ictus
