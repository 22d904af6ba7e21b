#pragma once

// Synthetic multi-class ground truth.
//
// CARDIAC: background 0, blob ("RV") 1, ring ("Myo") 2, disk ("LV") 3. The
// ring is concentric with the disk and fully encloses it; the blob sits apart.
// BLOB: background 0 and one low-contrast elliptical blob 1.
//
// A pixel belongs to a shape when its integer center passes the analytic
// inclusion test (no anti-aliasing).

#include <cstdint>
#include <string>
#include <vector>

#include "shapeloss/descriptors.hpp"
#include "shapeloss/grid.hpp"

namespace shapeloss {

enum class PhantomKind { Cardiac, Blob };

PhantomKind parse_phantom_kind(const std::string& name);
std::string phantom_kind_name(PhantomKind kind);

struct PhantomSpec {
    PhantomKind kind = PhantomKind::Cardiac;
    GridShape grid{64, 64};

    Vec2 heart_center{32.0, 38.0};
    double disk_radius = 8.0;
    double ring_outer_radius = 12.0;

    Vec2 blob_center{32.0, 13.0};
    Vec2 blob_radii{10.0, 10.0};  // (rows, columns)

    std::vector<double> class_intensity;  // empty = kind default
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    Connectivity connectivity = Connectivity::Eight;
    // Ring/disk length ratio window enforced at generation time.
    double min_length_ratio = 2.0;
    double max_length_ratio = 3.0;
};

PhantomSpec default_cardiac_spec();
PhantomSpec default_blob_spec();

struct Phantom {
    PhantomSpec spec;  // as generated (ring radius may have been adjusted)
    LabelMask mask;
    GrayImage image;
    DescriptorSet targets;
};

// Throws InvalidArgument when the geometry does not fit the grid, shapes
// overlap, or no ring thickness brings the length ratio into its window.
Phantom generate(const PhantomSpec& spec);

std::vector<std::string> class_names(PhantomKind kind);
// "bg", "class1", ... for masks of unknown provenance.
std::vector<std::string> generic_class_names(std::size_t num_classes);

}  // namespace shapeloss
