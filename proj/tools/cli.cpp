#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "shapeloss/errors.hpp"
#include "shapeloss/eval.hpp"
#include "shapeloss/image_io.hpp"
#include "shapeloss/phantom.hpp"
#include "shapeloss/version.hpp"

namespace shapeloss::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

Connectivity parse_connectivity(int n) {
    if (n == 4) return Connectivity::Four;
    if (n == 8) return Connectivity::Eight;
    throw ConfigError("connectivity must be 4 or 8, got " + std::to_string(n));
}

int connectivity_number(Connectivity c) { return c == Connectivity::Four ? 4 : 8; }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Provenance record written next to the outputs of every run.
struct Manifest {
    std::string subcommand;
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::string> outputs;

    void write(const fs::path& dir) const {
        ordered_json j;
        j["subcommand"] = subcommand;
        j["engine_version"] = kEngineVersion;
        j["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
        j["config"] = config_path.empty() ? ordered_json(nullptr) : ordered_json(config_path);
        j["inputs"] = ordered_json::object();
        for (const auto& [name, path] : inputs) j["inputs"][name] = path;
        j["outputs"] = outputs;
        j["timestamp"] = utc_timestamp();
        io::write_text(dir / "manifest.json", j.dump(2) + "\n");
    }
};

std::string read_text(const fs::path& path) {
    const auto bytes = io::read_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

std::vector<std::string> names_for(const std::string& kind, std::size_t K) {
    if (kind.empty()) return generic_class_names(K);
    auto names = class_names(parse_phantom_kind(kind));
    if (names.size() != K) throw ConfigError("--kind " + kind + " expects " + std::to_string(names.size()) + " classes");
    return names;
}

bool is_probmap_path(const fs::path& p) { return p.extension() == ".sspm"; }

LabelMask load_prediction(const fs::path& p) {
    if (is_probmap_path(p)) return argmax_labels(io::read_probmap(p));
    return io::read_mask(p);
}

std::size_t parse_index(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad " + what + " '" + s + "'");
    }
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad " + what + " '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(part);
    return out;
}

// "K:L"
std::pair<std::size_t, std::size_t> parse_class_pair(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 2) throw ConfigError("expected K:L, got '" + s + "'");
    return {parse_index(parts[0], "class"), parse_index(parts[1], "class")};
}

// "F:K:L:A:B" where F is V, L, C.x, C.y, D.x or D.y.
RatioEntry parse_ratio(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 5) throw ConfigError("expected F:K:L:A:B, got '" + s + "'");
    RatioEntry r{};
    const auto sym = split(parts[0], '.');
    try {
        r.f = parse_descriptor(sym.at(0));
    } catch (const std::exception&) {
        throw ConfigError("bad descriptor in ratio '" + s + "'");
    }
    if (sym.size() == 2 && (sym[1] == "x" || sym[1] == "y") && is_pair_valued(r.f)) {
        r.comp = sym[1] == "x" ? 0 : 1;
    } else if (sym.size() != 1 || is_pair_valued(r.f)) {
        throw ConfigError("bad descriptor component in ratio '" + s + "'");
    }
    r.k = parse_index(parts[1], "class");
    r.l = parse_index(parts[2], "class");
    r.a = parse_number(parts[3], "ratio bound");
    r.b = parse_number(parts[4], "ratio bound");
    return r;
}

// "HxW"
GridShape parse_grid(const std::string& s) {
    const auto parts = split(s, 'x');
    if (parts.size() != 2) throw ConfigError("expected HxW, got '" + s + "'");
    const auto h = parse_index(parts[0], "height");
    const auto w = parse_index(parts[1], "width");
    if (h == 0 || w == 0) throw ConfigError("grid must be at least 1x1");
    return GridShape(h, w);
}

ordered_json status_json(const std::vector<EntryStatus>& rows) {
    ordered_json out = ordered_json::array();
    for (const auto& s : rows) {
        out.push_back({{"label", s.label},
                       {"value", s.value},
                       {"lo", s.lo},
                       {"hi", s.hi},
                       {"active", s.active},
                       {"satisfied", s.satisfied}});
    }
    return out;
}

std::string status_table(const std::vector<EntryStatus>& rows) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %12s %12s %12s  %s\n", "entry", "value", "lo", "hi", "state");
    os << line;
    for (const auto& s : rows) {
        const char* state = !s.active ? "suspended" : (s.satisfied ? "ok" : "VIOLATED");
        std::snprintf(line, sizeof line, "%-10s %12.4f %12.4f %12.4f  %s\n", s.label.c_str(), s.value, s.lo, s.hi,
                      state);
        os << line;
    }
    return os.str();
}

// ---------------------------------------------------------------- describe

struct DescribeArgs {
    std::string mask;
    std::string format = "table";
    int connectivity = 8;
    std::string kind;
    std::string out;
};

int cmd_describe(const DescribeArgs& a) {
    const auto mask = io::read_mask(a.mask);
    const auto lap = build_laplacian(mask.shape(), parse_connectivity(a.connectivity));
    const auto d = describe(mask, *lap);
    const auto names = names_for(a.kind, mask.num_classes());
    std::string text;
    std::string ext;
    if (a.format == "csv") {
        text = descriptor_csv(d, names);
        ext = "csv";
    } else if (a.format == "json") {
        text = descriptor_json(d, names);
        ext = "json";
    } else if (a.format == "summary") {
        text = descriptor_summary_table(d, names).text;
        ext = "txt";
    } else {
        text = descriptor_pretty(d, names);
        ext = "txt";
    }
    std::cout << text;
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        const std::string file = "descriptors." + ext;
        io::write_text(fs::path(a.out) / file, text);
        Manifest m{"describe", std::nullopt, "", {{"mask", a.mask}}, {file}};
        m.write(a.out);
    }
    return kOk;
}

// ---------------------------------------------------------------- phantom

struct PhantomArgs {
    std::string kind = "cardiac";
    std::uint64_t seed = 0;
    std::optional<double> noise;
    int connectivity = 8;
    std::string out;
};

int cmd_phantom(const PhantomArgs& a) {
    const auto kind = parse_phantom_kind(a.kind);
    PhantomSpec spec = kind == PhantomKind::Cardiac ? default_cardiac_spec() : default_blob_spec();
    spec.seed = a.seed;
    spec.connectivity = parse_connectivity(a.connectivity);
    if (a.noise) spec.noise_sigma = *a.noise;
    const auto ph = generate(spec);
    const fs::path dir(a.out);
    fs::create_directories(dir);
    io::write_mask(dir / "mask.pgm", ph.mask);
    io::write_gray(dir / "image.pgm", ph.image);
    const auto names = class_names(kind);
    io::write_text(dir / "targets.csv", descriptor_csv(ph.targets, names));
    io::write_text(dir / "targets.json", descriptor_json(ph.targets, names));
    Manifest m{"phantom", a.seed, "", {}, {"mask.pgm", "mask.json", "image.pgm", "targets.csv", "targets.json"}};
    m.write(dir);
    std::cout << descriptor_pretty(ph.targets, names);
    return kOk;
}

// ---------------------------------------------------------------- reconstruct

struct ReconstructArgs {
    std::string spec;
    std::string mask;
    std::string gt;
    std::string image;
    std::string config;
    std::string kind;
    std::string grid;
    std::optional<std::size_t> classes;
    std::vector<std::string> shared_centroid;
    std::vector<std::string> ratios;
    bool allow_pair_ratios = false;
    std::string out;

    // Optional overrides of the config file.
    std::optional<std::uint64_t> seed;
    std::optional<int> connectivity;
    std::optional<std::string> predictor;
    bool smooth_abs = false;
    std::optional<double> slack;
    std::optional<double> lr;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> iterations;
};

int cmd_reconstruct(const ReconstructArgs& a) {
    if (a.spec.empty() == a.mask.empty()) throw ConfigError("exactly one of --spec or --mask is required");
    RunConfig cfg = a.config.empty() ? RunConfig{} : config_from_json(read_text(a.config));
    if (a.seed) cfg.train.seed = *a.seed;
    if (a.connectivity) cfg.connectivity = parse_connectivity(*a.connectivity);
    if (a.predictor) cfg.predictor = parse_predictor_kind(*a.predictor);
    if (a.smooth_abs) cfg.train.smooth_abs = true;
    if (a.slack) cfg.slack = *a.slack;
    if (a.lr) cfg.train.lr = *a.lr;
    if (a.epochs) cfg.train.epochs = *a.epochs;
    if (a.iterations) cfg.train.iterations_per_epoch = *a.iterations;
    cfg.train.validate();

    std::optional<LabelMask> mask, gt;
    std::optional<GrayImage> image;
    if (!a.mask.empty()) mask = io::read_mask(a.mask);
    if (!a.gt.empty()) gt = io::read_mask(a.gt);
    if (!a.image.empty()) image = io::read_gray(a.image);

    std::optional<GridShape> grid;
    if (mask) grid = mask->shape();
    else if (gt) grid = gt->shape();
    else if (image) grid = image->shape;
    if (!a.grid.empty()) {
        const auto g = parse_grid(a.grid);
        if (grid && !(*grid == g)) throw ConfigError("--grid disagrees with the input files");
        grid = g;
    }
    if (!grid) throw ConfigError("grid size unknown: pass --grid HxW, --gt or --image");
    if (gt && !(gt->shape() == *grid)) throw ConfigError("--gt shape differs from the run grid");
    if (image && !(image->shape == *grid)) throw ConfigError("--image shape differs from the run grid");

    const auto lap = build_laplacian(*grid, cfg.connectivity);
    ConstraintSpec spec;
    if (mask) {
        BoundsOptions bo;
        bo.slack = cfg.slack;
        spec.entries = bounds_from_target(describe(*mask, *lap), bo);
        spec.barrier = cfg.barrier;
    } else {
        spec = spec_from_json(read_text(a.spec));
    }
    for (const auto& s : a.shared_centroid) {
        const auto [k, l] = parse_class_pair(s);
        spec = shared_centroid_prior(std::move(spec), k, l);
    }
    for (const auto& s : a.ratios) spec.ratios.push_back(parse_ratio(s));
    if (a.allow_pair_ratios) spec.allow_pair_ratios = true;

    std::size_t K = 0;
    if (mask) K = mask->num_classes();
    else if (gt) K = gt->num_classes();
    if (a.classes) {
        if (K != 0 && K != *a.classes) throw ConfigError("--classes disagrees with the input masks");
        K = *a.classes;
    }
    if (K == 0) {
        for (const auto& e : spec.entries) K = std::max(K, e.k + 1);
        for (const auto& r : spec.ratios) K = std::max({K, r.k + 1, r.l + 1});
        K = std::max<std::size_t>(K, 2);
    }
    if (K < 2) throw ConfigError("at least 2 classes are required");
    spec.validate(K);
    const auto names = names_for(a.kind, K);

    auto predictor = make_predictor(cfg.predictor, *grid, K, image, cfg.train.seed, cfg.hidden);
    const auto result = train(*predictor, spec, *lap, cfg.train);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    std::vector<std::string> outputs{"config.json", "spec.json", "training_log.jsonl", "report.json"};
    io::write_text(dir / "config.json", config_to_json(cfg));
    io::write_text(dir / "spec.json", spec_to_json(result.spec));
    io::write_text(dir / "training_log.jsonl", training_log_jsonl(result));

    ordered_json rep;
    rep["status"] = result.status == TrainStatus::Completed ? "completed" : "numerical_failure";
    rep["diagnostic"] = result.diagnostic;
    rep["iterations"] = result.iterations;
    rep["all_satisfied"] = result.all_satisfied();
    rep["initial_descriptors"] = ordered_json::parse(descriptor_json(result.initial_values, names));
    rep["final_descriptors"] = ordered_json::parse(descriptor_json(result.final_values, names));
    rep["constraints"] = status_json(result.final_status);
    io::write_text(dir / "report.json", rep.dump(2) + "\n");

    if (result.final_probs) {
        const auto& probs = *result.final_probs;
        io::write_probmap(dir / "probmap.sspm", probs);
        for (const auto& p : io::write_probmap_pgms(dir, "prob", probs)) outputs.push_back(p.filename().string());
        io::write_mask(dir / "prediction.pgm", argmax_labels(probs));
        outputs.insert(outputs.end(), {"probmap.sspm", "prediction.pgm", "prediction.json"});
        if (gt) {
            const auto ev = report(probs, *gt, result.spec, *lap, names);
            io::write_text(dir / "eval.json", eval_report_json(ev));
            io::write_text(dir / "eval.txt", eval_report_table(ev));
            outputs.insert(outputs.end(), {"eval.json", "eval.txt"});
            std::cout << eval_report_table(ev);
        }
    }
    Manifest m{"reconstruct", cfg.train.seed, a.config, {}, outputs};
    if (!a.spec.empty()) m.inputs.emplace_back("spec", a.spec);
    if (!a.mask.empty()) m.inputs.emplace_back("mask", a.mask);
    if (!a.gt.empty()) m.inputs.emplace_back("gt", a.gt);
    if (!a.image.empty()) m.inputs.emplace_back("image", a.image);
    m.write(dir);

    if (!gt) std::cout << status_table(result.final_status);
    std::cerr << "iterations " << result.iterations << ", " << result.wall_seconds << " s\n";
    if (result.status == TrainStatus::NumericalFailure) {
        std::cerr << "numerical failure: " << result.diagnostic << "\n";
        return kNumerical;
    }
    return result.all_satisfied() ? kOk : kUnsatisfied;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string pred;
    std::string gt;
    std::string spec;
    std::string kind;
    int connectivity = 8;
    std::string out;
};

int cmd_eval(const EvalArgs& a) {
    const auto gt = io::read_mask(a.gt);
    std::optional<EvalReport> ev;
    if (!a.spec.empty()) {
        if (!is_probmap_path(a.pred)) throw ConfigError("--spec needs a .sspm probability map as --pred");
        const auto probs = io::read_probmap(a.pred);
        const auto lap = build_laplacian(probs.shape(), parse_connectivity(a.connectivity));
        const auto spec = spec_from_json(read_text(a.spec));
        spec.validate(probs.num_classes());
        ev = report(probs, gt, spec, *lap, names_for(a.kind, probs.num_classes()));
    } else {
        const auto pred = load_prediction(a.pred);
        ev = report_masks(pred, gt, names_for(a.kind, std::max(pred.num_classes(), gt.num_classes())));
    }
    const auto json = eval_report_json(*ev);
    std::cout << json;
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        io::write_text(fs::path(a.out) / "eval.json", json);
        io::write_text(fs::path(a.out) / "eval.txt", eval_report_table(*ev));
        Manifest m{"eval", std::nullopt, "", {{"pred", a.pred}, {"gt", a.gt}}, {"eval.json", "eval.txt"}};
        if (!a.spec.empty()) m.inputs.emplace_back("spec", a.spec);
        m.write(a.out);
    }
    return ev->constraints.empty() || ev->all_active_satisfied() ? kOk : kUnsatisfied;
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
    std::string image;
    std::string gt;
    std::string pred;
    std::string out;
};

int cmd_plot(const PlotArgs& a) {
    std::vector<io::PpmImage> panels;
    std::vector<std::string> outputs;
    Manifest m{"plot", std::nullopt, "", {}, {}};
    const fs::path dir(a.out);
    fs::create_directories(dir);
    auto add = [&](const std::string& name, io::PpmImage img) {
        io::write_ppm(dir / (name + ".ppm"), img);
        m.outputs.push_back(name + ".ppm");
        panels.push_back(std::move(img));
    };
    if (!a.image.empty()) {
        add("image", render_gray(io::read_gray(a.image)));
        m.inputs.emplace_back("image", a.image);
    }
    if (!a.gt.empty()) {
        add("gt", render_labels(io::read_mask(a.gt)));
        m.inputs.emplace_back("gt", a.gt);
    }
    add("prediction", render_labels(load_prediction(a.pred)));
    m.inputs.emplace_back("pred", a.pred);
    for (std::size_t n = 1; n < panels.size(); ++n) {
        if (panels[n].height != panels[0].height || panels[n].width != panels[0].width) {
            throw ConfigError("plot panels have different sizes");
        }
    }
    io::write_ppm(dir / "panels.ppm", side_by_side(panels));
    m.outputs.push_back("panels.ppm");
    m.write(dir);
    return kOk;
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "epochs") c.train.epochs = v.get<std::size_t>();
            else if (key == "iterations_per_epoch") c.train.iterations_per_epoch = v.get<std::size_t>();
            else if (key == "lr") c.train.lr = v.get<double>();
            else if (key == "beta1") c.train.beta1 = v.get<double>();
            else if (key == "beta2") c.train.beta2 = v.get<double>();
            else if (key == "eps") c.train.eps = v.get<double>();
            else if (key == "seed") c.train.seed = v.get<std::uint64_t>();
            else if (key == "smooth_abs") c.train.smooth_abs = v.get<bool>();
            else if (key == "smooth_delta") c.train.smooth_delta = v.get<double>();
            else if (key == "log_every") c.train.log_every = v.get<std::size_t>();
            else if (key == "suspend_degenerate") c.train.degeneracy.suspend = v.get<bool>();
            else if (key == "activation_mass") c.train.degeneracy.activation_mass = v.get<double>();
            else if (key == "t0") c.barrier.t0 = v.get<double>();
            else if (key == "growth") c.barrier.growth = v.get<double>();
            else if (key == "t_max") c.barrier.t_max = v.get<double>();
            else if (key == "connectivity") c.connectivity = parse_connectivity(v.get<int>());
            else if (key == "predictor") c.predictor = parse_predictor_kind(v.get<std::string>());
            else if (key == "hidden") c.hidden = v.get<std::size_t>();
            else if (key == "slack") c.slack = v.get<double>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (!(c.slack >= 0.0)) throw ConfigError("slack must be >= 0");
    if (c.hidden == 0) throw ConfigError("hidden must be positive");
    c.train.validate();
    c.barrier.validate();
    return c;
}

std::string config_to_json(const RunConfig& c) {
    ordered_json j;
    j["epochs"] = c.train.epochs;
    j["iterations_per_epoch"] = c.train.iterations_per_epoch;
    j["lr"] = c.train.lr;
    j["beta1"] = c.train.beta1;
    j["beta2"] = c.train.beta2;
    j["eps"] = c.train.eps;
    j["seed"] = c.train.seed;
    j["smooth_abs"] = c.train.smooth_abs;
    j["smooth_delta"] = c.train.smooth_delta;
    j["log_every"] = c.train.log_every;
    j["suspend_degenerate"] = c.train.degeneracy.suspend;
    j["activation_mass"] = c.train.degeneracy.activation_mass;
    j["t0"] = c.barrier.t0;
    j["growth"] = c.barrier.growth;
    j["t_max"] = c.barrier.t_max;
    j["connectivity"] = connectivity_number(c.connectivity);
    j["predictor"] = c.predictor == PredictorKind::FreeField ? "freefield" : "coordnet";
    j["hidden"] = c.hidden;
    j["slack"] = c.slack;
    return j.dump(2) + "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Segmentation from shape descriptors: moments, lengths and log-barrier training"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kEngineVersion);

    DescribeArgs da;
    auto* describe_cmd = app.add_subcommand("describe", "Print the descriptor table of a label mask");
    describe_cmd->add_option("mask", da.mask, "Mask PGM (sidecar .json header optional)")->required();
    describe_cmd->add_option("--format", da.format, "Output format")
        ->check(CLI::IsMember({"csv", "table", "json", "summary"}));
    describe_cmd->add_option("--connectivity", da.connectivity, "Pixel neighborhood (4 or 8)");
    describe_cmd->add_option("--kind", da.kind, "Class names of a phantom kind (cardiac, blob)");
    describe_cmd->add_option("--out", da.out, "Also write the table and a manifest into DIR");

    PhantomArgs pa;
    auto* phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic mask, image and descriptor targets");
    phantom_cmd->add_option("--kind", pa.kind, "cardiac or blob")->check(CLI::IsMember({"cardiac", "blob"}));
    phantom_cmd->add_option("--seed", pa.seed, "Noise seed");
    phantom_cmd->add_option("--noise", pa.noise, "Additive Gaussian noise sigma");
    phantom_cmd->add_option("--connectivity", pa.connectivity, "Pixel neighborhood for the length targets");
    phantom_cmd->add_option("--out", pa.out, "Output directory")->required();

    ReconstructArgs ra;
    auto* rec_cmd = app.add_subcommand("reconstruct", "Train a predictor against descriptor bounds");
    rec_cmd->alias("train");
    auto* spec_opt = rec_cmd->add_option("--spec", ra.spec, "Constraint spec JSON");
    auto* mask_opt = rec_cmd->add_option("--mask", ra.mask, "Derive +/-slack bounds from this mask");
    spec_opt->excludes(mask_opt);
    rec_cmd->add_option("--gt", ra.gt, "Ground-truth mask for evaluation");
    rec_cmd->add_option("--image", ra.image, "Intensity image (CoordNet input)");
    rec_cmd->add_option("--config", ra.config, "Flat JSON run config");
    rec_cmd->add_option("--kind", ra.kind, "Class names of a phantom kind (cardiac, blob)");
    rec_cmd->add_option("--grid", ra.grid, "Grid size HxW when no image or mask is given");
    rec_cmd->add_option("--classes", ra.classes, "Number of classes when no mask is given");
    rec_cmd->add_option("--shared-centroid", ra.shared_centroid, "K:L copies class L's centroid bounds onto K");
    rec_cmd->add_option("--ratio", ra.ratios, "F:K:L:A:B adds A <= F(K)/F(L) <= B, e.g. L:2:3:2:3");
    rec_cmd->add_flag("--allow-pair-ratios", ra.allow_pair_ratios, "Permit ratios of centroid/spread components");
    rec_cmd->add_option("--seed", ra.seed, "Predictor seed");
    rec_cmd->add_option("--connectivity", ra.connectivity, "Pixel neighborhood (4 or 8)");
    rec_cmd->add_option("--predictor", ra.predictor, "freefield or coordnet");
    rec_cmd->add_flag("--smooth-abs", ra.smooth_abs, "Differentiate |.| in the length through sqrt(d^2 + delta)");
    rec_cmd->add_option("--slack", ra.slack, "Relative bound width when deriving bounds from --mask");
    rec_cmd->add_option("--lr", ra.lr, "Adam learning rate");
    rec_cmd->add_option("--epochs", ra.epochs, "Number of epochs");
    rec_cmd->add_option("--iterations", ra.iterations, "Iterations per epoch");
    rec_cmd->add_option("--out", ra.out, "Output directory")->required();

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "Dice scores (and constraint table) of a prediction");
    eval_cmd->add_option("--pred", ea.pred, "Predicted mask PGM or .sspm probability map")->required();
    eval_cmd->add_option("--gt", ea.gt, "Ground-truth mask PGM")->required();
    eval_cmd->add_option("--spec", ea.spec, "Constraint spec JSON (needs a .sspm prediction)");
    eval_cmd->add_option("--kind", ea.kind, "Class names of a phantom kind (cardiac, blob)");
    eval_cmd->add_option("--connectivity", ea.connectivity, "Pixel neighborhood (4 or 8)");
    eval_cmd->add_option("--out", ea.out, "Also write eval.json/eval.txt and a manifest into DIR");

    PlotArgs pl;
    auto* plot_cmd = app.add_subcommand("plot", "Render image | gt | prediction panels as PPM");
    plot_cmd->add_option("--image", pl.image, "Grayscale image PGM");
    plot_cmd->add_option("--gt", pl.gt, "Ground-truth mask PGM");
    plot_cmd->add_option("--pred", pl.pred, "Predicted mask PGM or .sspm probability map")->required();
    plot_cmd->add_option("--out", pl.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (describe_cmd->parsed()) return cmd_describe(da);
        if (phantom_cmd->parsed()) return cmd_phantom(pa);
        if (rec_cmd->parsed()) return cmd_reconstruct(ra);
        if (eval_cmd->parsed()) return cmd_eval(ea);
        if (plot_cmd->parsed()) return cmd_plot(pl);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace shapeloss::cli
