#include "ictus/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "ictus/error.hpp"
#include "ictus/parallel.hpp"
#include "ictus/text.hpp"

namespace ictus {

double EvaluationContext::interictal_hours() const {
    double total = 0.0;
    for (const auto& iv : interictal) total += iv.length();
    return total / 3600.0;
}

namespace {

bool inside_any(std::span<const Interval> spans, double t) {
    return std::any_of(spans.begin(), spans.end(), [t](const Interval& iv) { return iv.contains(t); });
}

std::vector<Interval> intersect(std::span<const Interval> a, std::span<const Interval> b) {
    std::vector<Interval> out;
    for (const auto& x : a) {
        for (const auto& y : b) {
            const double lo = std::max(x.begin_s, y.begin_s);
            const double hi = std::min(x.end_s, y.end_s);
            if (hi > lo) out.push_back({lo, hi});
        }
    }
    std::sort(out.begin(), out.end(), [](const Interval& l, const Interval& r) { return l.begin_s < r.begin_s; });
    return out;
}

}  // namespace

EvaluationContext make_evaluation_context(const Recording& rec, const SeizureSplit& split, int preictal_minutes,
                                          double postictal_minutes) {
    split.validate(rec.seizure_count());
    const IntervalLabeling lab = label_intervals(rec, preictal_minutes, postictal_minutes);
    const auto blocks = seizure_blocks(rec, postictal_minutes);
    EvaluationContext ctx;
    auto tests = split.test_indices;
    std::sort(tests.begin(), tests.end());
    for (std::size_t k : tests) {
        ctx.onsets_s.push_back(rec.seizure_onsets_s[k]);
        ctx.scope.push_back(blocks[k]);
    }
    std::vector<Interval> exclusion = IntervalLabeling::spans(lab.ictal);
    for (const auto& iv : lab.excluded) exclusion.push_back(iv.span);
    ctx.exclusion = intersect(exclusion, ctx.scope);
    const auto interictal = IntervalLabeling::spans(lab.interictal);
    ctx.interictal = intersect(interictal, ctx.scope);
    return ctx;
}

ClassifiedAlarms classify_alarms(std::span<const AlarmEvent> alarms, const EvaluationContext& ctx,
                                 const ForecastConfig& cfg) {
    for (std::size_t i = 1; i < alarms.size(); ++i) {
        if (alarms[i].time_s < alarms[i - 1].time_s) throw ValidationError("alarms must be sorted by time");
    }
    ClassifiedAlarms result;
    for (const auto& a : alarms) {
        if (inside_any(ctx.scope, a.time_s)) result.alarms.push_back(a);
    }
    const double sph = 60.0 * cfg.sph_minutes;
    const double sop = 60.0 * cfg.sop_minutes();
    std::vector<char> credited(result.alarms.size(), 0);
    auto& c = result.counts;
    c.positives = ctx.onsets_s.size();
    for (double onset : ctx.onsets_s) {
        bool claimed = false;
        for (std::size_t i = 0; i < result.alarms.size(); ++i) {
            if (credited[i]) continue;
            const double t = result.alarms[i].time_s;
            if (onset > t + sph && onset <= t + sph + sop) {
                credited[i] = 1;
                claimed = true;
                break;
            }
        }
        claimed ? ++c.tp : ++c.fn;
    }
    for (std::size_t i = 0; i < result.alarms.size(); ++i) {
        auto& a = result.alarms[i];
        if (credited[i]) {
            a.classification = AlarmClass::true_positive;
        } else if (inside_any(ctx.exclusion, a.time_s)) {
            a.classification = AlarmClass::unresolved;
            ++c.unresolved;
        } else {
            a.classification = AlarmClass::false_positive;
            ++c.fp;
        }
    }
    c.interictal_hours = ctx.interictal_hours();
    return result;
}

double sensitivity(const EvalCounts& c) {
    if (c.positives == 0) throw ValidationError("sensitivity undefined without positives");
    return static_cast<double>(c.tp) / static_cast<double>(c.positives);
}

double fpr_per_hour(const EvalCounts& c) {
    if (!(c.interictal_hours > 0.0)) throw ValidationError("FPR/h undefined without interictal time");
    return static_cast<double>(c.fp) / c.interictal_hours;
}

std::vector<double> GridAxes::default_z() {
    std::vector<double> z;
    for (int k = 1; k <= 18; ++k) z.push_back(k * 5 / 100.0);
    return z;
}

std::vector<double> GridAxes::default_y() {
    std::vector<double> y;
    for (int k = 2; k <= 9; ++k) y.push_back(k / 10.0);
    return y;
}

bool ranks_before(const GridPoint& a, const GridPoint& b) {
    return std::make_tuple(-a.se, a.fpr_per_h, a.z, a.y, static_cast<int>(a.encoder), a.preictal_minutes) <
           std::make_tuple(-b.se, b.fpr_per_h, b.z, b.y, static_cast<int>(b.encoder), b.preictal_minutes);
}

std::optional<GridPoint> SearchResult::best_for(EncoderKind encoder) const {
    for (const auto& p : ranked) {
        if (p.encoder == encoder) return p;
    }
    return std::nullopt;
}

SearchResult grid_search(std::span<const StreamCase> cases, const GridAxes& axes, const SearchSettings& settings) {
    if (axes.z.empty() || axes.y.empty() || axes.encoders.empty() || axes.preictal_minutes.empty()) {
        throw ValidationError("grid axes must be non-empty");
    }
    std::vector<const StreamCase*> selected;
    for (EncoderKind enc : axes.encoders) {
        for (int x : axes.preictal_minutes) {
            const StreamCase* found = nullptr;
            for (const auto& c : cases) {
                if (c.encoder == enc && c.preictal_minutes == x) found = &c;
            }
            if (!found) {
                throw ValidationError("missing stream for encoder " + std::string(to_string(enc)) + ", preictal " +
                                      std::to_string(x) + " min");
            }
            selected.push_back(found);
        }
    }

    const std::size_t per_pair = axes.points_per_pair();
    std::vector<GridPoint> points(selected.size() * per_pair);
    // One task per (case, Z): the likelihood and binarization are shared by all Y.
    parallel_for(selected.size() * axes.z.size(), settings.threads, [&](std::size_t task) {
        const StreamCase& sc = *selected[task / axes.z.size()];
        const std::size_t zi = task % axes.z.size();
        ForecastConfig cfg;
        cfg.smoothing_window_s = settings.smoothing_window_s;
        cfg.preictal_minutes = sc.preictal_minutes;
        cfg.sph_minutes = settings.sph_minutes;
        cfg.sop_override_minutes = settings.sop_override_minutes;
        cfg.likelihood_threshold = axes.z[zi];
        const auto likelihood = smooth_likelihood(sc.stream, cfg.smoothing_window_s);
        const auto fp = firing_power(binarize(likelihood, cfg.likelihood_threshold), cfg.preictal_minutes);
        for (std::size_t yi = 0; yi < axes.y.size(); ++yi) {
            cfg.firing_threshold = axes.y[yi];
            const auto alarms = raise_alarms(fp, cfg);
            const auto classified = classify_alarms(alarms, sc.context, cfg);
            GridPoint& p = points[(task / axes.z.size()) * per_pair + zi * axes.y.size() + yi];
            p.encoder = sc.encoder;
            p.preictal_minutes = sc.preictal_minutes;
            p.z = axes.z[zi];
            p.y = axes.y[yi];
            p.counts = classified.counts;
            p.se = sensitivity(p.counts);
            p.fpr_per_h = fpr_per_hour(p.counts);
        }
    });
    std::stable_sort(points.begin(), points.end(), ranks_before);
    SearchResult result;
    result.best = points.front();
    result.ranked = std::move(points);
    return result;
}

void write_report_csv(std::ostream& out, const SearchResult& result, const std::string& patient,
                      std::span<const std::string> metadata) {
    for (const auto& line : metadata) out << "# " << line << '\n';
    out << "patient,encoder,preictal_min,Z,Y,SE,FPR_h,TP,FN,FP,unresolved,interictal_h\n";
    for (const auto& p : result.ranked) {
        out << patient << ',' << to_string(p.encoder) << ',' << p.preictal_minutes << ',' << format_fixed(p.z, 2) << ','
            << format_fixed(p.y, 2) << ',' << format_fixed(p.se, 3) << ',' << format_fixed(p.fpr_per_h, 3) << ','
            << p.counts.tp << ',' << p.counts.fn << ',' << p.counts.fp << ',' << p.counts.unresolved << ','
            << format_fixed(p.counts.interictal_hours, 3) << '\n';
    }
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[idx[k]] == 1) {
                rank_sum += avg_rank;
                ++pos;
            }
        }
        i = j;
    }
    const std::size_t neg = scores.size() - pos;
    if (pos == 0 || neg == 0) throw ValidationError("AUC needs both classes");
    const double p = static_cast<double>(pos);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

}  // namespace ictus
