#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapeloss/constraints.hpp"
#include "shapeloss/descriptors.hpp"
#include "shapeloss/gradients.hpp"
#include "shapeloss/predictor.hpp"

namespace shapeloss {

struct AdamState {
    std::size_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;

    AdamState() = default;
    AdamState(std::size_t n, double lr_, double beta1_, double beta2_, double eps_);
};

// Bias-corrected Adam update in place. Throws NumericalError on a non-finite
// gradient (state and params untouched in that case).
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t iterations_per_epoch = 100;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    bool smooth_abs = false;
    double smooth_delta = kSmoothAbsDelta;
    std::size_t log_every = 1;  // epochs between log records
    DegeneracyPolicy degeneracy;

    void validate() const;
};

struct TrainRecord {
    std::size_t epoch = 0;
    double t = 0.0;
    double loss = 0.0;
    // min(v - lo, hi - v) per canonical entry; negative = violated.
    // NaN marks a suspended (inactive) entry.
    std::vector<double> entry_slack;
    std::vector<double> ratio_slack;
};

enum class TrainStatus { Completed, NumericalFailure };

struct EntryStatus {
    std::string label;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool active = true;
    bool satisfied = false;
};

struct TrainingReport {
    TrainStatus status = TrainStatus::Completed;
    std::string diagnostic;
    std::size_t iterations = 0;
    ConstraintSpec spec;  // canonical order; slack vectors follow it
    std::vector<TrainRecord> records;
    DescriptorSet initial_values;
    DescriptorSet final_values;
    std::vector<EntryStatus> final_status;
    std::optional<ProbMap> final_probs;  // last finite iterate
    std::vector<double> final_params;
    double wall_seconds = 0.0;

    bool all_satisfied() const;
};

// Constraint table for probs against spec, evaluated with exact |.|.
std::vector<EntryStatus> constraint_status(const ProbMap& probs, const ConstraintSpec& spec,
                                           const LaplacianCache& lap, const DegeneracyPolicy& policy = {});

// Minimizes the barrier loss of spec over the predictor parameters with
// Adam. t follows spec.barrier.t_at(epoch). Deterministic for a fixed config.
TrainingReport train(Predictor& predictor, const ConstraintSpec& spec, const LaplacianCache& lap,
                     const TrainConfig& config);

// One JSON object per record: {"epoch","t","loss","entries":{label:slack},"ratios":{...}}.
std::string training_log_jsonl(const TrainingReport& report);

}  // namespace shapeloss
