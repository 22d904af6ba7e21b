#pragma once
// Command-line front end. Exit codes: 0 success / constraints satisfied,
// 1 constraints unsatisfied, 2 usage or config error, 3 numerical failure.

#include <filesystem>
#include <string>

#include "shapeloss/optimizer.hpp"
#include "shapeloss/predictor.hpp"

namespace shapeloss::cli {

enum ExitCode : int { kOk = 0, kUnsatisfied = 1, kUsage = 2, kNumerical = 3 };

// Flat run configuration. Every training hyperparameter is surfaced here.
struct RunConfig {
    TrainConfig train;
    BarrierParams barrier;
    Connectivity connectivity = Connectivity::Eight;
    PredictorKind predictor = PredictorKind::FreeField;
    std::size_t hidden = 64;
    double slack = 0.10;
};

// Unknown keys and ill-typed values raise ConfigError.
RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& cfg);

int run(int argc, char** argv);

}  // namespace shapeloss::cli
