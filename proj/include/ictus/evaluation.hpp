#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ictus/encoders.hpp"
#include "ictus/forecast.hpp"
#include "ictus/recording.hpp"
#include "ictus/segmentation.hpp"

namespace ictus {

struct EvalCounts {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::size_t positives = 0;  // test seizures
    std::size_t unresolved = 0;
    double interictal_hours = 0.0;

    bool operator==(const EvalCounts&) const = default;
};

// Where and against what alarms are judged.
struct EvaluationContext {
    std::vector<double> onsets_s;      // seizures to predict
    std::vector<Interval> scope;       // alarms outside are ignored
    std::vector<Interval> exclusion;   // ictal + postictal: unmatched alarms here stay unresolved
    std::vector<Interval> interictal;  // FPR/h denominator, already clipped to scope

    double interictal_hours() const;
};

// Scope is the union of the test seizures' blocks (see seizure_blocks).
EvaluationContext make_evaluation_context(const Recording& rec, const SeizureSplit& split, int preictal_minutes,
                                          double postictal_minutes = kDefaultPostictalMinutes);

struct ClassifiedAlarms {
    std::vector<AlarmEvent> alarms;  // in-scope alarms with their class
    EvalCounts counts;
};

// An alarm at t predicts an onset in (t + SPH, t + SPH + SOP]. Each onset is
// credited to the earliest still-unused alarm whose window holds it; onsets nobody claims
// are false negatives. Unclaimed alarms are false positives unless they sit in
// an exclusion zone. Alarms must be sorted by time.
ClassifiedAlarms classify_alarms(std::span<const AlarmEvent> alarms, const EvaluationContext& ctx,
                                 const ForecastConfig& cfg);

double sensitivity(const EvalCounts& c);
double fpr_per_hour(const EvalCounts& c);

struct GridAxes {
    std::vector<EncoderKind> encoders{EncoderKind::rp, EncoderKind::gaf, EncoderKind::mtf};
    std::vector<int> preictal_minutes{10, 20, 30, 40};
    std::vector<double> z = default_z();
    std::vector<double> y = default_y();

    // 0.05, 0.10, ..., 0.90 and 0.2, 0.3, ..., 0.9.
    static std::vector<double> default_z();
    static std::vector<double> default_y();
    std::size_t points_per_pair() const { return z.size() * y.size(); }
};

struct GridPoint {
    EncoderKind encoder = EncoderKind::rp;
    int preictal_minutes = 0;
    double z = 0.0;
    double y = 0.0;
    EvalCounts counts;
    double se = 0.0;
    double fpr_per_h = 0.0;

    bool operator==(const GridPoint&) const = default;
};

// Highest SE, then lowest FPR/h, then lowest Z; Y, encoder and preictal time
// settle any remaining tie.
bool ranks_before(const GridPoint& a, const GridPoint& b);

struct StreamCase {
    EncoderKind encoder = EncoderKind::rp;
    int preictal_minutes = 0;
    ProbabilityStream stream;
    EvaluationContext context;
};

struct SearchSettings {
    int smoothing_window_s = 60;
    double sph_minutes = 5.0;
    std::optional<double> sop_override_minutes;
    unsigned threads = 1;
};

struct SearchResult {
    std::vector<GridPoint> ranked;
    GridPoint best;

    std::optional<GridPoint> best_for(EncoderKind encoder) const;
};

SearchResult grid_search(std::span<const StreamCase> cases, const GridAxes& axes, const SearchSettings& settings);

// Columns: patient,encoder,preictal_min,Z,Y,SE,FPR_h,TP,FN,FP,unresolved,interictal_h
void write_report_csv(std::ostream& out, const SearchResult& result, const std::string& patient,
                      std::span<const std::string> metadata);

// Area under the ROC curve by the rank statistic (ties count one half).
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace ictus
