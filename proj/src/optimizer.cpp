#include "shapeloss/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <json.hpp>

#include "shapeloss/errors.hpp"

namespace shapeloss {

AdamState::AdamState(std::size_t n, double lr_, double beta1_, double beta2_, double eps_)
    : m(n, 0.0), v(n, 0.0), lr(lr_), beta1(beta1_), beta2(beta2_), eps(eps_) {}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state) {
    if (params.size() != grad.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw InvalidArgument("adam_step: parameter, gradient and state sizes differ");
    }
    for (std::size_t n = 0; n < grad.size(); ++n) {
        if (!std::isfinite(grad[n])) {
            throw NumericalError("adam_step: non-finite gradient at parameter " + std::to_string(n));
        }
    }
    ++state.step;
    const double step = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, step);
    const double c2 = 1.0 - std::pow(state.beta2, step);
    for (std::size_t n = 0; n < params.size(); ++n) {
        state.m[n] = state.beta1 * state.m[n] + (1.0 - state.beta1) * grad[n];
        state.v[n] = state.beta2 * state.v[n] + (1.0 - state.beta2) * grad[n] * grad[n];
        const double mhat = state.m[n] / c1;
        const double vhat = state.v[n] / c2;
        params[n] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

void TrainConfig::validate() const {
    if (epochs == 0 || iterations_per_epoch == 0) throw ConfigError("epochs and iterations_per_epoch must be positive");
    if (log_every == 0) throw ConfigError("log_every must be positive");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in (0, 1)");
    }
    if (!(eps > 0.0)) throw ConfigError("Adam eps must be > 0");
    if (smooth_abs && !(smooth_delta > 0.0)) throw ConfigError("smooth_delta must be > 0");
    if (!(degeneracy.activation_mass >= 0.0)) throw ConfigError("activation_mass must be >= 0");
}

bool TrainingReport::all_satisfied() const {
    if (status != TrainStatus::Completed) return false;
    return std::all_of(final_status.begin(), final_status.end(),
                       [](const EntryStatus& s) { return !s.active || s.satisfied; });
}

std::vector<EntryStatus> constraint_status(const ProbMap& probs, const ConstraintSpec& spec,
                                           const LaplacianCache& lap, const DegeneracyPolicy& policy) {
    const auto canon = spec.canonical();
    const auto requests = canon.ratio_requests();
    const auto values = describe(probs, lap, requests);
    std::vector<EntryStatus> out;
    for (const auto& e : canon.entries) {
        EntryStatus s{entry_label(e), std::numeric_limits<double>::quiet_NaN(), e.lo, e.hi, true, false};
        s.active = entry_active(e, values, policy);
        if (const auto v = descriptor_value(values.classes.at(e.k), e.f, e.comp)) {
            s.value = *v;
            s.satisfied = e.lo <= *v && *v <= e.hi;
        }
        out.push_back(std::move(s));
    }
    for (std::size_t n = 0; n < canon.ratios.size(); ++n) {
        const auto& r = canon.ratios[n];
        EntryStatus s{ratio_label(r), std::numeric_limits<double>::quiet_NaN(), r.a, r.b, true, false};
        s.active = ratio_active(r, values, policy);
        if (const auto& q = values.ratios[n].value) {
            s.value = *q;
            s.satisfied = r.a <= *q && *q <= r.b;
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

TrainRecord make_record(std::size_t epoch, double t, double loss, const ConstraintSpec& canon,
                        const DescriptorSet& values, const DegeneracyPolicy& policy) {
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    TrainRecord rec{epoch, t, loss, {}, {}};
    for (const auto& e : canon.entries) {
        const auto v = descriptor_value(values.classes.at(e.k), e.f, e.comp);
        rec.entry_slack.push_back(entry_active(e, values, policy) && v ? std::min(*v - e.lo, e.hi - *v) : kNaN);
    }
    for (std::size_t n = 0; n < canon.ratios.size(); ++n) {
        const auto& r = canon.ratios[n];
        const auto& q = values.ratios.at(n).value;
        rec.ratio_slack.push_back(ratio_active(r, values, policy) && q ? std::min(*q - r.a, r.b - *q) : kNaN);
    }
    return rec;
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrainingReport train(Predictor& predictor, const ConstraintSpec& spec, const LaplacianCache& lap,
                     const TrainConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    spec.validate(predictor.num_classes());
    if (!(lap.shape() == predictor.shape())) throw ConfigError("Laplacian shape does not match predictor grid");

    TrainingReport report;
    report.spec = spec.canonical();
    const auto& canon = report.spec;
    const auto requests = canon.ratio_requests();

    LossOptions opts;
    opts.abs = {config.smooth_abs ? AbsMode::Smooth : AbsMode::Exact, config.smooth_delta};
    opts.degeneracy = config.degeneracy;

    auto params = predictor.parameters();
    AdamState state(params.size(), config.lr, config.beta1, config.beta2, config.eps);
    std::vector<double> grad_params(params.size(), 0.0);
    std::vector<double> last_good(params.begin(), params.end());

    {
        const auto probs = softmax(predictor.forward());
        report.initial_values = describe(probs, lap, requests);
    }

    bool failed = false;
    for (std::size_t epoch = 0; epoch < config.epochs && !failed; ++epoch) {
        const double t = canon.barrier.t_at(epoch);
        double loss = 0.0;
        DescriptorSet values;
        for (std::size_t it = 0; it < config.iterations_per_epoch; ++it) {
            try {
                auto lg = loss_grad(predictor.forward(), canon, t, lap, opts);
                if (!std::isfinite(lg.loss)) throw NumericalError("non-finite total loss");
                predictor.backward(lg.grad, grad_params);
                adam_step(params, grad_params, state);
                if (!all_finite(params)) throw NumericalError("non-finite parameters after Adam step");
                loss = lg.loss;
                values = std::move(lg.values);
                std::copy(params.begin(), params.end(), last_good.begin());
                ++report.iterations;
            } catch (const Error& e) {
                // Non-finite logits, loss, gradient or parameters, or a collapsed class with
                // suspension disabled. Parameters roll back to the last finite iterate.
                report.diagnostic =
                    "epoch " + std::to_string(epoch) + " iteration " + std::to_string(it) + ": " + e.what();
                failed = true;
            }
            if (failed) break;
        }
        if (failed) break;
        if (epoch % config.log_every == 0 || epoch + 1 == config.epochs) {
            report.records.push_back(make_record(epoch, t, loss, canon, values, opts.degeneracy));
        }
    }

    if (failed) {
        report.status = TrainStatus::NumericalFailure;
        std::copy(last_good.begin(), last_good.end(), params.begin());
    }
    auto probs = softmax(predictor.forward());
    report.final_values = describe(probs, lap, requests);
    report.final_status = constraint_status(probs, canon, lap, config.degeneracy);
    report.final_probs = std::move(probs);
    report.final_params.assign(params.begin(), params.end());
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

std::string training_log_jsonl(const TrainingReport& report) {
    const auto& canon = report.spec;
    std::vector<std::string> entry_keys, ratio_keys;
    auto unique_key = [](std::vector<std::string>& keys, std::string label) {
        std::string key = label;
        for (int n = 2; std::find(keys.begin(), keys.end(), key) != keys.end(); ++n) key = label + "#" + std::to_string(n);
        keys.push_back(key);
    };
    for (const auto& e : canon.entries) unique_key(entry_keys, entry_label(e));
    for (const auto& r : canon.ratios) unique_key(ratio_keys, ratio_label(r));

    auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr); };
    std::string out;
    for (const auto& rec : report.records) {
        nlohmann::ordered_json j;
        j["epoch"] = rec.epoch;
        j["t"] = rec.t;
        j["loss"] = num(rec.loss);
        nlohmann::ordered_json entries = nlohmann::ordered_json::object();
        for (std::size_t n = 0; n < rec.entry_slack.size(); ++n) entries[entry_keys[n]] = num(rec.entry_slack[n]);
        nlohmann::ordered_json ratios = nlohmann::ordered_json::object();
        for (std::size_t n = 0; n < rec.ratio_slack.size(); ++n) ratios[ratio_keys[n]] = num(rec.ratio_slack[n]);
        j["entries"] = std::move(entries);
        j["ratios"] = std::move(ratios);
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace shapeloss
