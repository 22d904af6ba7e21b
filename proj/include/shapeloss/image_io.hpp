#pragma once

// NetPBM and raw dump formats.
//
//   * Label masks: binary PGM (P5, maxval <= 255), byte = class index, plus a
//     sidecar JSON header {"height", "width", "num_classes"} at the same path
//     with extension ".json".
//   * ProbMap display export: one P5 PGM per class, probability * 255 rounded.
//   * ProbMap lossless dump: 16-byte header "SSPM" u32 height u32 width u32 K,
//     then |Omega| * K float32, all little-endian, pixel-major.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shapeloss/grid.hpp"

namespace shapeloss::io {

struct PgmImage {
    std::size_t height = 0;
    std::size_t width = 0;
    unsigned maxval = 255;
    std::vector<std::uint8_t> pixels;
};

struct Rgb {
    std::uint8_t r, g, b;
};

struct PpmImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<Rgb> pixels;
};

// Parsing reports the byte offset of the first malformed token.
PgmImage parse_pgm(const std::vector<std::uint8_t>& bytes);
PgmImage read_pgm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const PgmImage& img);
void write_pgm(const std::filesystem::path& path, const PgmImage& img);
void write_ppm(const std::filesystem::path& path, const PpmImage& img);

std::filesystem::path header_path_for(const std::filesystem::path& mask_path);

// If the sidecar header is missing, K is inferred as max(label + 1, 2).
LabelMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const LabelMask& mask);

GrayImage read_gray(const std::filesystem::path& path);
void write_gray(const std::filesystem::path& path, const GrayImage& img);

std::vector<std::uint8_t> encode_probmap(const ProbMap& probs);
ProbMap decode_probmap(const std::vector<std::uint8_t>& bytes);
void write_probmap(const std::filesystem::path& path, const ProbMap& probs);
ProbMap read_probmap(const std::filesystem::path& path);

// Writes <stem>_class<k>.pgm for every class; returns the written paths.
std::vector<std::filesystem::path> write_probmap_pgms(const std::filesystem::path& dir, const std::string& stem,
                                                      const ProbMap& probs);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace shapeloss::io
