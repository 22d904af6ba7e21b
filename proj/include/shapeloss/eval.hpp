#pragma once

#include <string>
#include <vector>

#include "shapeloss/constraints.hpp"
#include "shapeloss/descriptors.hpp"
#include "shapeloss/grid.hpp"
#include "shapeloss/image_io.hpp"
#include "shapeloss/optimizer.hpp"

namespace shapeloss {

// 2|P & G| / (|P| + |G|) for class k. Both empty -> 1, one empty -> 0.
double dice(const LabelMask& pred, const LabelMask& gt, std::size_t k);

struct EvalReport {
    std::vector<std::string> class_names;
    std::vector<double> dice;        // per class, background included
    double mean_foreground_dice = 0.0;
    std::vector<EntryStatus> constraints;
    double runtime_ms = 0.0;

    bool all_active_satisfied() const;
};

// Dice of argmax(probs) against gt, plus the constraint table of probs.
EvalReport report(const ProbMap& probs, const LabelMask& gt, const ConstraintSpec& spec, const LaplacianCache& lap,
                  std::vector<std::string> class_names = {});

// Dice only, for two hard masks.
EvalReport report_masks(const LabelMask& pred, const LabelMask& gt, std::vector<std::string> class_names = {});

// runtime_ms is left out so identical inputs give identical bytes.
std::string eval_report_json(const EvalReport& r);
std::string eval_report_table(const EvalReport& r);

// Descriptor tables: one row per class with columns class,V,Cx,Cy,Dx,Dy,L.
std::string descriptor_csv(const DescriptorSet& d, const std::vector<std::string>& names);
std::string descriptor_pretty(const DescriptorSet& d, const std::vector<std::string>& names);
std::string descriptor_json(const DescriptorSet& d, const std::vector<std::string>& names);

// Transposed layout: descriptor rows, foreground class columns. Adjacent
// foreground classes whose printed centroids coincide share one cell.
struct DescriptorSummary {
    std::string text;
    std::size_t value_count = 0;  // printed continuous values
};
DescriptorSummary descriptor_summary_table(const DescriptorSet& d, const std::vector<std::string>& names);

// Panels rendered with a fixed class palette; image panel is grayscale.
io::PpmImage render_gray(const GrayImage& img);
io::PpmImage render_labels(const LabelMask& mask);
io::PpmImage side_by_side(const std::vector<io::PpmImage>& panels, std::size_t gap = 2);

}  // namespace shapeloss
