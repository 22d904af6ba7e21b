#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "oracles.hpp"
#include "shapeloss/errors.hpp"
#include "shapeloss/image_io.hpp"

using namespace shapeloss;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::size_t offset_of_failure(const std::string& s) {
    try {
        io::parse_pgm(bytes_of(s));
    } catch (const ParseError& e) {
        return e.byte_offset();
    }
    return std::string::npos;
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("shapeloss_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("parse_pgm reads headers with comments") {
    std::string s = "P5\n# a comment\n3 2\n255\n";
    s += std::string("\x00\x01\x02\x03\x04\x05", 6);
    const auto img = io::parse_pgm(bytes_of(s));
    CHECK(img.height == 2);
    CHECK(img.width == 3);
    CHECK(img.maxval == 255);
    CHECK(img.pixels == std::vector<std::uint8_t>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("parse_pgm reports byte offsets") {
    CHECK(offset_of_failure("P6\n1 1\n255\n\x00") == 0);
    CHECK(offset_of_failure("P5\nx 1\n255\n") == 3);
    CHECK(offset_of_failure("P5\n1 1\n300\n\x00") == 7);
    CHECK(offset_of_failure("P5\n2 2\n255\n\x00") == 11);
    CHECK(offset_of_failure("") == 0);
}

TEST_CASE("mask round trip with sidecar header") {
    std::mt19937_64 rng(2);
    const auto dir = scratch_dir("mask");
    const auto mask = oracle::random_mask(rng, GridShape(7, 9), 4, true);
    io::write_mask(dir / "m.pgm", mask);
    CHECK(fs::exists(dir / "m.json"));
    CHECK(io::read_mask(dir / "m.pgm") == mask);

    fs::remove(dir / "m.json");
    const auto inferred = io::read_mask(dir / "m.pgm");
    CHECK(inferred.labels().size() == mask.labels().size());
    CHECK(inferred.num_classes() >= 2);
}

TEST_CASE("probmap dump is lossless to float32 and rejects bad headers") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 25; ++trial) {
        const GridShape g(1 + rng() % 9, 1 + rng() % 9);
        const std::size_t K = 2 + rng() % 3;
        const auto p = oracle::random_probmap(rng, g, K);
        const auto bytes = io::encode_probmap(p);
        CHECK(bytes.size() == 16 + 4 * g.pixel_count() * K);
        const auto q = io::decode_probmap(bytes);
        CHECK(q.shape() == g);
        CHECK(q.num_classes() == K);
        for (std::size_t n = 0; n < p.values().size(); ++n) {
            CHECK(q.values()[n] == double(float(p.values()[n])));
        }
        CHECK(io::encode_probmap(q) == bytes);
    }
    auto bad = io::encode_probmap(ProbMap::uniform(GridShape(2, 2), 2));
    bad[0] = 'X';
    CHECK_THROWS_AS(io::decode_probmap(bad), ParseError);
    bad = io::encode_probmap(ProbMap::uniform(GridShape(2, 2), 2));
    bad.pop_back();
    CHECK_THROWS_AS(io::decode_probmap(bad), ParseError);
}

TEST_CASE("gray image and per-class exports") {
    const auto dir = scratch_dir("gray");
    GrayImage img{GridShape(2, 3), {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}};
    io::write_gray(dir / "g.pgm", img);
    const auto back = io::read_gray(dir / "g.pgm");
    for (std::size_t i = 0; i < 6; ++i) CHECK(back.values[i] == doctest::Approx(img.values[i]).epsilon(1.0 / 255.0));
    const auto files = io::write_probmap_pgms(dir, "p", ProbMap::uniform(GridShape(2, 2), 3));
    CHECK(files.size() == 3);
    CHECK(files[2].filename() == "p_class2.pgm");
}
