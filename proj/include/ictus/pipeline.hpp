#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ictus/config.hpp"
#include "ictus/evaluation.hpp"
#include "ictus/recording.hpp"
#include "ictus/segmentation.hpp"

namespace ictus {

// Balanced training windows for one preictal time, drawn only from the
// blocks of the training seizures.
BalancedSet training_windows(const Recording& preprocessed, const SeizureSplit& split, int preictal_minutes,
                             const PipelineConfig& cfg);

// Earliest time that has to be scored so the firing power is defined from the
// start of the first test block.
double scoring_start_s(const Recording& rec, const SeizureSplit& split, const PipelineConfig& cfg);

struct ModelSummary {
    EncoderKind encoder = EncoderKind::rp;
    int preictal_minutes = 0;
    std::size_t train_windows = 0;
    std::size_t epochs = 0;
    double final_loss = 0.0;
    double final_accuracy = 0.0;
    bool stopped_early = false;
};

struct PipelineResult {
    SearchResult search;
    std::vector<StreamCase> cases;  // the scored test streams the search ran on
    std::vector<ModelSummary> models;
    std::string report_csv;
    std::string summary;
    std::uint64_t config_hash = 0;
};

// filter -> segment -> encode -> train -> score -> search on one recording.
PipelineResult run_pipeline(const Recording& raw, const SeizureSplit& split, const PipelineConfig& cfg,
                            std::ostream* log = nullptr);

// run_pipeline on the seeded synthetic benchmark patient.
PipelineResult run_repro(const PipelineConfig& cfg, std::ostream* log = nullptr);

std::string format_grid_point(const GridPoint& p);

}  // namespace ictus
