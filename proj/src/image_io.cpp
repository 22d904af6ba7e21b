#include "shapeloss/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "shapeloss/errors.hpp"

namespace shapeloss::io {

namespace {

class PnmCursor {
public:
    PnmCursor(const std::vector<std::uint8_t>& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t token_start() const noexcept { return token_start_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long read_uint(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        token_start_ = start;
        unsigned long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000UL) throw ParseError(std::string("PGM ") + what + " too large", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError(std::string("PGM: expected ") + what, start);
        return value;
    }

    // Exactly one whitespace byte separates the header from the raster.
    void single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw ParseError("PGM: expected single whitespace before raster", pos_);
        }
        ++pos_;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_;
    std::size_t token_start_ = 0;
};

void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32_le(const std::vector<std::uint8_t>& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[at + b]) << (8 * b);
    return v;
}

constexpr std::array<std::uint8_t, 4> kProbMagic{'S', 'S', 'P', 'M'};

}  // namespace

PgmImage parse_pgm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw ParseError("PGM: missing P5 magic", 0);
    }
    if (bytes.size() < 3 || !(std::isspace(bytes[2]) || bytes[2] == '#')) {
        throw ParseError("PGM: expected whitespace after magic", 2);
    }
    PnmCursor c(bytes, 2);
    const auto width = c.read_uint("width");
    if (width == 0) throw ParseError("PGM: zero width", c.token_start());
    const auto height = c.read_uint("height");
    if (height == 0) throw ParseError("PGM: zero height", c.token_start());
    const auto maxval = c.read_uint("maxval");
    if (maxval == 0 || maxval > 255) {
        throw ParseError("PGM: only 8-bit maxval (1..255) is supported", c.token_start());
    }
    c.single_space();
    const std::size_t raster_at = c.offset();
    const std::size_t need = width * height;
    if (bytes.size() - raster_at < need) {
        throw ParseError("PGM: truncated raster, expected " + std::to_string(need) + " bytes", bytes.size());
    }
    PgmImage img;
    img.width = width;
    img.height = height;
    img.maxval = static_cast<unsigned>(maxval);
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(raster_at),
                      bytes.begin() + static_cast<std::ptrdiff_t>(raster_at + need));
    for (std::size_t n = 0; n < need; ++n) {
        if (img.pixels[n] > maxval) throw ParseError("PGM: sample exceeds maxval", raster_at + n);
    }
    return img;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

PgmImage read_pgm(const std::filesystem::path& path) { return parse_pgm(read_bytes(path)); }

std::vector<std::uint8_t> encode_pgm(const PgmImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" + std::to_string(img.maxval) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& img) { write_bytes(path, encode_pgm(img)); }

void write_ppm(const std::filesystem::path& path, const PpmImage& img) {
    const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.pixels.size() * 3);
    for (const auto& p : img.pixels) {
        out.push_back(p.r);
        out.push_back(p.g);
        out.push_back(p.b);
    }
    write_bytes(path, out);
}

std::filesystem::path header_path_for(const std::filesystem::path& mask_path) {
    auto p = mask_path;
    p.replace_extension(".json");
    return p;
}

LabelMask read_mask(const std::filesystem::path& path) {
    const auto pgm = read_pgm(path);
    std::size_t num_classes = 0;
    const auto header = header_path_for(path);
    if (std::filesystem::exists(header)) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_bytes(header));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("mask header " + header.string() + ": " + e.what(), e.byte);
        }
        const auto h = j.at("height").get<std::size_t>();
        const auto w = j.at("width").get<std::size_t>();
        num_classes = j.at("num_classes").get<std::size_t>();
        if (h != pgm.height || w != pgm.width) {
            throw ParseError("mask header dimensions disagree with PGM raster", 0);
        }
    } else {
        const auto top = pgm.pixels.empty() ? 0 : *std::max_element(pgm.pixels.begin(), pgm.pixels.end());
        num_classes = std::max<std::size_t>(static_cast<std::size_t>(top) + 1, 2);
    }
    return LabelMask(GridShape(pgm.height, pgm.width), num_classes, pgm.pixels);
}

void write_mask(const std::filesystem::path& path, const LabelMask& mask) {
    PgmImage img;
    img.height = mask.shape().height();
    img.width = mask.shape().width();
    img.maxval = static_cast<unsigned>(std::clamp<std::size_t>(mask.num_classes() - 1, 1, 255));
    img.pixels.assign(mask.labels().begin(), mask.labels().end());
    write_pgm(path, img);
    const nlohmann::json header = {
        {"height", mask.shape().height()}, {"width", mask.shape().width()}, {"num_classes", mask.num_classes()}};
    write_text(header_path_for(path), header.dump(2) + "\n");
}

GrayImage read_gray(const std::filesystem::path& path) {
    const auto pgm = read_pgm(path);
    GrayImage img{GridShape(pgm.height, pgm.width), {}};
    img.values.reserve(pgm.pixels.size());
    for (auto p : pgm.pixels) img.values.push_back(static_cast<double>(p) / pgm.maxval);
    return img;
}

void write_gray(const std::filesystem::path& path, const GrayImage& img) {
    PgmImage pgm;
    pgm.height = img.shape.height();
    pgm.width = img.shape.width();
    pgm.pixels.reserve(img.values.size());
    for (double v : img.values) {
        pgm.pixels.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
    write_pgm(path, pgm);
}

std::vector<std::uint8_t> encode_probmap(const ProbMap& probs) {
    std::vector<std::uint8_t> out(kProbMagic.begin(), kProbMagic.end());
    put_u32_le(out, static_cast<std::uint32_t>(probs.shape().height()));
    put_u32_le(out, static_cast<std::uint32_t>(probs.shape().width()));
    put_u32_le(out, static_cast<std::uint32_t>(probs.num_classes()));
    out.reserve(out.size() + probs.values().size() * 4);
    for (double v : probs.values()) put_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

ProbMap decode_probmap(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16) throw ParseError("probmap dump: truncated header", bytes.size());
    if (!std::equal(kProbMagic.begin(), kProbMagic.end(), bytes.begin())) {
        throw ParseError("probmap dump: bad magic", 0);
    }
    const std::size_t h = get_u32_le(bytes, 4);
    const std::size_t w = get_u32_le(bytes, 8);
    const std::size_t K = get_u32_le(bytes, 12);
    if (h == 0 || w == 0) throw ParseError("probmap dump: zero dimension", 4);
    if (K < 2) throw ParseError("probmap dump: fewer than 2 classes", 12);
    const std::size_t count = h * w * K;
    if (bytes.size() != 16 + count * 4) {
        throw ParseError("probmap dump: expected " + std::to_string(16 + count * 4) + " bytes", bytes.size());
    }
    std::vector<double> values(count);
    for (std::size_t n = 0; n < count; ++n) {
        values[n] = static_cast<double>(std::bit_cast<float>(get_u32_le(bytes, 16 + 4 * n)));
    }
    // float32 rounding can nudge a row sum by ~1e-7, inside the simplex tolerance.
    return ProbMap(GridShape(h, w), K, std::move(values));
}

void write_probmap(const std::filesystem::path& path, const ProbMap& probs) { write_bytes(path, encode_probmap(probs)); }

ProbMap read_probmap(const std::filesystem::path& path) { return decode_probmap(read_bytes(path)); }

std::vector<std::filesystem::path> write_probmap_pgms(const std::filesystem::path& dir, const std::string& stem,
                                                      const ProbMap& probs) {
    std::vector<std::filesystem::path> written;
    const std::size_t K = probs.num_classes();
    for (std::size_t k = 0; k < K; ++k) {
        PgmImage pgm;
        pgm.height = probs.shape().height();
        pgm.width = probs.shape().width();
        pgm.pixels.resize(probs.pixel_count());
        for (std::size_t i = 0; i < probs.pixel_count(); ++i) {
            pgm.pixels[i] = static_cast<std::uint8_t>(std::lround(probs.at(i, k) * 255.0));
        }
        auto path = dir / (stem + "_class" + std::to_string(k) + ".pgm");
        write_pgm(path, pgm);
        written.push_back(std::move(path));
    }
    return written;
}

}  // namespace shapeloss::io
