#include "shapeloss/eval.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "shapeloss/errors.hpp"
#include "shapeloss/phantom.hpp"

namespace shapeloss {

namespace {

std::string fmt(const char* pattern, double v) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), pattern, v);
    return buf.data();
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::vector<std::string> names_or_default(std::vector<std::string> names, std::size_t K) {
    if (names.size() != K) return generic_class_names(K);
    return names;
}

}  // namespace

double dice(const LabelMask& pred, const LabelMask& gt, std::size_t k) {
    if (!(pred.shape() == gt.shape())) throw InvalidArgument("dice: mask shapes differ");
    std::size_t p = 0, g = 0, both = 0;
    for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
        const bool a = pred.at(i) == k;
        const bool b = gt.at(i) == k;
        p += a;
        g += b;
        both += a && b;
    }
    if (p + g == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

bool EvalReport::all_active_satisfied() const {
    return std::all_of(constraints.begin(), constraints.end(),
                       [](const EntryStatus& s) { return !s.active || s.satisfied; });
}

EvalReport report_masks(const LabelMask& pred, const LabelMask& gt, std::vector<std::string> class_names) {
    const std::size_t K = std::max(pred.num_classes(), gt.num_classes());
    EvalReport r;
    r.class_names = names_or_default(std::move(class_names), K);
    double fg = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        r.dice.push_back(dice(pred, gt, k));
        if (k > 0) fg += r.dice.back();
    }
    r.mean_foreground_dice = K > 1 ? fg / static_cast<double>(K - 1) : r.dice.front();
    return r;
}

EvalReport report(const ProbMap& probs, const LabelMask& gt, const ConstraintSpec& spec, const LaplacianCache& lap,
                  std::vector<std::string> class_names) {
    const auto started = std::chrono::steady_clock::now();
    if (probs.num_classes() != gt.num_classes()) throw InvalidArgument("report: class counts differ");
    auto r = report_masks(argmax_labels(probs), gt, std::move(class_names));
    r.constraints = constraint_status(probs, spec, lap);
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return r;
}

std::string eval_report_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json dice = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < r.dice.size(); ++k) dice[r.class_names[k]] = r.dice[k];
    j["dice"] = std::move(dice);
    j["mean_foreground_dice"] = r.mean_foreground_dice;
    j["constraints"] = nlohmann::ordered_json::array();
    for (const auto& c : r.constraints) {
        j["constraints"].push_back({{"entry", c.label},
                                    {"value", std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nullptr},
                                    {"lo", c.lo},
                                    {"hi", c.hi},
                                    {"active", c.active},
                                    {"satisfied", c.satisfied}});
    }
    j["all_active_satisfied"] = r.all_active_satisfied();
    return j.dump(2) + "\n";
}

std::string eval_report_table(const EvalReport& r) {
    std::string out;
    std::string head, row;
    for (std::size_t k = 1; k < r.dice.size(); ++k) {
        head += pad(r.class_names[k], 9);
        row += pad(fmt("%.3f", r.dice[k]), 9);
    }
    out += "DSC      " + head + pad("Overall", 9) + "\n";
    out += "         " + row + pad(fmt("%.3f", r.mean_foreground_dice), 9) + "\n";
    if (!r.constraints.empty()) {
        out += "\nconstraint        value         lo         hi  status\n";
        for (const auto& c : r.constraints) {
            std::string label = c.label;
            label.resize(std::max<std::size_t>(label.size(), 12), ' ');
            const char* status = !c.active ? "suspended" : (c.satisfied ? "ok" : "VIOLATED");
            out += label + pad(fmt("%.3f", c.value), 11) + pad(fmt("%.3f", c.lo), 11) + pad(fmt("%.3f", c.hi), 11) +
                   "  " + status + "\n";
        }
    }
    return out;
}

std::string descriptor_csv(const DescriptorSet& d, const std::vector<std::string>& names) {
    const auto n = names_or_default(names, d.num_classes());
    std::string out = "class,V,Cx,Cy,Dx,Dy,L\n";
    for (std::size_t k = 0; k < d.num_classes(); ++k) {
        const auto& c = d.classes[k];
        out += n[k] + "," + fmt("%.10g", c.volume) + ",";
        if (c.present()) {
            out += fmt("%.10g", (*c.centroid)[0]) + "," + fmt("%.10g", (*c.centroid)[1]) + "," +
                   fmt("%.10g", (*c.spread)[0]) + "," + fmt("%.10g", (*c.spread)[1]);
        } else {
            out += "absent,absent,absent,absent";
        }
        out += "," + fmt("%.10g", c.length) + "\n";
    }
    return out;
}

std::string descriptor_pretty(const DescriptorSet& d, const std::vector<std::string>& names) {
    const auto n = names_or_default(names, d.num_classes());
    std::string out = pad("class", 8) + pad("V", 11) + pad("Cx", 9) + pad("Cy", 9) + pad("Dx", 9) + pad("Dy", 9) +
                      pad("L", 11) + "\n";
    for (std::size_t k = 0; k < d.num_classes(); ++k) {
        const auto& c = d.classes[k];
        out += pad(n[k], 8) + pad(fmt("%.2f", c.volume), 11);
        if (c.present()) {
            out += pad(fmt("%.2f", (*c.centroid)[0]), 9) + pad(fmt("%.2f", (*c.centroid)[1]), 9) +
                   pad(fmt("%.2f", (*c.spread)[0]), 9) + pad(fmt("%.2f", (*c.spread)[1]), 9);
        } else {
            out += pad("absent", 9) + pad("-", 9) + pad("-", 9) + pad("-", 9);
        }
        out += pad(fmt("%.2f", c.length), 11) + "\n";
    }
    return out;
}

std::string descriptor_json(const DescriptorSet& d, const std::vector<std::string>& names) {
    const auto n = names_or_default(names, d.num_classes());
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < d.num_classes(); ++k) {
        const auto& c = d.classes[k];
        nlohmann::ordered_json jc;
        jc["class"] = n[k];
        jc["k"] = k;
        jc["present"] = c.present();
        jc["V"] = c.volume;
        if (c.present()) {
            jc["C"] = {(*c.centroid)[0], (*c.centroid)[1]};
            jc["D"] = {(*c.spread)[0], (*c.spread)[1]};
        } else {
            jc["C"] = nullptr;
            jc["D"] = nullptr;
        }
        jc["L"] = c.length;
        j.push_back(std::move(jc));
    }
    nlohmann::ordered_json out;
    out["classes"] = std::move(j);
    if (!d.ratios.empty()) {
        out["ratios"] = nlohmann::ordered_json::array();
        for (const auto& r : d.ratios) {
            out["ratios"].push_back({{"f", descriptor_symbol(r.request.f)},
                                     {"k", r.request.k},
                                     {"l", r.request.l},
                                     {"value", r.value ? nlohmann::ordered_json(*r.value) : nullptr}});
        }
    }
    return out.dump(2) + "\n";
}

DescriptorSummary descriptor_summary_table(const DescriptorSet& d, const std::vector<std::string>& names) {
    const auto n = names_or_default(names, d.num_classes());
    constexpr std::size_t kLabel = 22;
    constexpr std::size_t kCell = 18;
    auto label = [&](std::string s) {
        s.resize(kLabel, ' ');
        return s;
    };
    auto pair_text = [](const std::optional<Vec2>& v) {
        if (!v) return std::string("absent");
        return "(" + fmt("%.1f", (*v)[0]) + ", " + fmt("%.1f", (*v)[1]) + ")";
    };

    DescriptorSummary s;
    std::string header = label("descriptor (pixels)");
    std::string vol = label("Volume V"), cen = label("Centroid C"), spr = label("Spread D"), len = label("Length L");
    const std::size_t K = d.num_classes();
    for (std::size_t k = 1; k < K; ++k) {
        const auto& c = d.classes[k];
        header += pad(n[k], kCell);
        vol += pad(fmt("%.1f", c.volume), kCell);
        spr += pad(pair_text(c.spread), kCell);
        len += pad(fmt("%.1f", c.length), kCell);
        s.value_count += 2;
        if (c.present()) s.value_count += 2;
    }
    // Centroid cells, merging runs of equal printed values.
    for (std::size_t k = 1; k < K;) {
        const auto text = pair_text(d.classes[k].centroid);
        std::size_t run = 1;
        while (k + run < K && pair_text(d.classes[k + run].centroid) == text && d.classes[k].present()) ++run;
        cen += pad(text, kCell * run);
        if (d.classes[k].present()) s.value_count += 2;
        k += run;
    }
    s.text = header + "\n" + vol + "\n" + cen + "\n" + spr + "\n" + len + "\n";
    return s;
}

io::PpmImage render_gray(const GrayImage& img) {
    io::PpmImage out{img.shape.height(), img.shape.width(), {}};
    out.pixels.reserve(img.values.size());
    for (double v : img.values) {
        const auto g = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        out.pixels.push_back({g, g, g});
    }
    return out;
}

io::PpmImage render_labels(const LabelMask& mask) {
    static constexpr std::array<io::Rgb, 8> palette{{{0, 0, 0},
                                                      {230, 60, 60},
                                                      {60, 200, 90},
                                                      {70, 110, 240},
                                                      {240, 200, 40},
                                                      {200, 80, 220},
                                                      {40, 210, 220},
                                                      {250, 250, 250}}};
    io::PpmImage out{mask.shape().height(), mask.shape().width(), {}};
    out.pixels.reserve(mask.pixel_count());
    for (auto l : mask.labels()) out.pixels.push_back(palette[l % palette.size()]);
    return out;
}

io::PpmImage side_by_side(const std::vector<io::PpmImage>& panels, std::size_t gap) {
    if (panels.empty()) throw InvalidArgument("side_by_side: no panels");
    std::size_t H = 0, W = 0;
    for (const auto& p : panels) {
        H = std::max(H, p.height);
        W += p.width;
    }
    W += gap * (panels.size() - 1);
    io::PpmImage out{H, W, std::vector<io::Rgb>(H * W, io::Rgb{255, 255, 255})};
    std::size_t x0 = 0;
    for (const auto& p : panels) {
        for (std::size_t r = 0; r < p.height; ++r) {
            for (std::size_t c = 0; c < p.width; ++c) out.pixels[r * W + x0 + c] = p.pixels[r * p.width + c];
        }
        x0 += p.width + gap;
    }
    return out;
}

}  // namespace shapeloss
