#include <doctest.h>

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <unistd.h>

#include "mblur/image_io.h"

using namespace mblur;

namespace {

/// Unique temp path, removed on scope exit.
struct TempPath {
    std::filesystem::path path;

    explicit TempPath(const char* ext) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("mblur_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ext);
    }
    ~TempPath() {
        std::error_code ec;
        std::filesystem::remove(path, ec);
    }
    std::string str() const { return path.string(); }
};

std::vector<uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

uint32_t be32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

struct Chunk {
    std::string type;
    std::vector<uint8_t> data;
    uint32_t crc = 0;
};

std::vector<Chunk> parse_chunks(const std::vector<uint8_t>& png) {
    static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    REQUIRE(png.size() >= 8);
    CHECK(std::memcmp(png.data(), sig, 8) == 0);
    std::vector<Chunk> out;
    size_t i = 8;
    while (i + 12 <= png.size()) {
        const uint32_t len = be32(&png[i]);
        REQUIRE(i + 12 + len <= png.size());
        Chunk c;
        c.type.assign(png.begin() + i + 4, png.begin() + i + 8);
        c.data.assign(png.begin() + i + 8, png.begin() + i + 8 + len);
        c.crc = be32(&png[i + 8 + len]);
        out.push_back(std::move(c));
        i += 12 + len;
    }
    CHECK(i == png.size());
    return out;
}

/// Inflates the IDAT stream and strips the per-row filter bytes, checking
/// every filter is 0 (none).
std::vector<uint8_t> decode_scanlines(const std::vector<uint8_t>& png, int h, size_t row_bytes) {
    std::vector<uint8_t> idat;
    for (const Chunk& c : parse_chunks(png)) {
        // Stored CRCs must cover type + data.
        std::vector<uint8_t> crc_input(c.type.begin(), c.type.end());
        crc_input.insert(crc_input.end(), c.data.begin(), c.data.end());
        CHECK(c.crc == crc32(0L, crc_input.data(), static_cast<uInt>(crc_input.size())));
        if (c.type == "IDAT") idat.insert(idat.end(), c.data.begin(), c.data.end());
    }
    REQUIRE(!idat.empty());

    std::vector<uint8_t> filtered((row_bytes + 1) * h);
    uLongf out_len = static_cast<uLongf>(filtered.size());
    REQUIRE(uncompress(filtered.data(), &out_len, idat.data(), static_cast<uLong>(idat.size())) ==
            Z_OK);
    REQUIRE(out_len == filtered.size());

    std::vector<uint8_t> pixels;
    for (int y = 0; y < h; ++y) {
        CHECK(filtered[y * (row_bytes + 1)] == 0);
        const uint8_t* row = filtered.data() + y * (row_bytes + 1) + 1;
        pixels.insert(pixels.end(), row, row + row_bytes);
    }
    return pixels;
}

}  // namespace

TEST_CASE("pfm files round-trip at float precision") {
    Plane<Vec3> img(3, 2, Vec3{0, 0, 0});
    const double inf = std::numeric_limits<double>::infinity();
    double v = 0.1234567891;
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) {
            img.at(x, y) = Vec3{v, -v * 2, v * 100};
            v *= 3.7;
        }
    img.at(2, 1).z = inf;

    TempPath f(".pfm");
    write_pfm(f.str(), img);
    Plane<Vec3> back = read_pfm(f.str());
    REQUIRE(back.width() == 3);
    REQUIRE(back.height() == 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) {
            // Exactly the float-rounded original, no double-trip drift.
            CHECK(back.at(x, y).x == static_cast<double>(static_cast<float>(img.at(x, y).x)));
            CHECK(back.at(x, y).y == static_cast<double>(static_cast<float>(img.at(x, y).y)));
            CHECK(back.at(x, y).z == static_cast<double>(static_cast<float>(img.at(x, y).z)));
        }
    CHECK(back.at(2, 1).z == inf);
}

TEST_CASE("pfm layout is bottom-up little-endian with a fixed header") {
    Plane<double> gray(4, 2, 0.0);
    gray.at(0, 0) = 1.0;   // top row
    gray.at(0, 1) = 2.0;   // bottom row

    TempPath f(".pfm");
    write_pfm(f.str(), gray);
    std::vector<uint8_t> bytes = slurp(f.str());

    const std::string header = "Pf\n4 2\n-1.0\n";
    REQUIRE(bytes.size() == header.size() + 4u * 2u * sizeof(float));
    CHECK(std::memcmp(bytes.data(), header.data(), header.size()) == 0);

    // The first stored scanline is the bottom row.
    float first, fifth;
    std::memcpy(&first, bytes.data() + header.size(), sizeof(float));
    std::memcpy(&fifth, bytes.data() + header.size() + 4 * sizeof(float), sizeof(float));
    CHECK(first == 2.0f);
    CHECK(fifth == 1.0f);

    SUBCASE("grayscale reads back replicated to rgb") {
        Plane<Vec3> back = read_pfm(f.str());
        CHECK(back.at(0, 0) == Vec3{1, 1, 1});
        CHECK(back.at(0, 1) == Vec3{2, 2, 2});
        CHECK(back.at(1, 0) == Vec3{0, 0, 0});
    }
}

TEST_CASE("two-channel pfm stores a zero blue channel") {
    Plane<Vec2> vel(2, 1, Vec2{0, 0});
    vel.at(0, 0) = {3.5, -2.25};
    TempPath f(".pfm");
    write_pfm(f.str(), vel);
    Plane<Vec3> back = read_pfm(f.str());
    CHECK(back.at(0, 0) == Vec3{3.5, -2.25, 0});
    CHECK(back.at(1, 0) == Vec3{0, 0, 0});
}

TEST_CASE("pfm reader rejects malformed input") {
    auto error_of = [](const std::string& content) {
        TempPath f(".pfm");
        spit(f.str(), content);
        try {
            read_pfm(f.str());
        } catch (const std::runtime_error& e) {
            return std::string(e.what());
        }
        return std::string{};
    };

    CHECK(error_of("P6\n2 2\n-1.0\n________________").find("not a PFM") != std::string::npos);
    CHECK(error_of("PF\n2 2\n1.0\n________________").find("big-endian") != std::string::npos);
    CHECK(error_of("PF\n-2 2\n-1.0\n____").find("bad dimensions") != std::string::npos);
    CHECK(error_of("PF\n2 2\n-1.0\nshort").find("truncated") != std::string::npos);
    CHECK_THROWS_AS(read_pfm("/nonexistent/file.pfm"), std::runtime_error);
}

TEST_CASE("png rgb8 container carries gamma-encoded scanlines") {
    Plane<Vec3> img(2, 2, Vec3{0, 0, 0});
    img.at(0, 0) = {0.5, 0.0, 1.0};
    img.at(1, 0) = {-0.25, 2.0, 0.5};   // out-of-range clamps
    img.at(0, 1) = {1.0, 1.0, 1.0};
    img.at(1, 1) = {0.0, 0.5, 0.0};

    std::vector<uint8_t> png = encode_png_rgb8(img);
    auto chunks = parse_chunks(png);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].type == "IHDR");
    CHECK(chunks[1].type == "IDAT");
    CHECK(chunks[2].type == "IEND");
    REQUIRE(chunks[0].data.size() == 13);
    CHECK(be32(&chunks[0].data[0]) == 2);       // width
    CHECK(be32(&chunks[0].data[4]) == 2);       // height
    CHECK(chunks[0].data[8] == 8);              // bit depth
    CHECK(chunks[0].data[9] == 2);              // rgb
    CHECK(chunks[0].data[10] == 0);             // compression
    CHECK(chunks[0].data[11] == 0);             // filter method
    CHECK(chunks[0].data[12] == 0);             // no interlace

    // linear 0.5 -> round(255 * 0.5^(1/2.2)) = 186.
    const std::vector<uint8_t> expect = {186, 0, 255, 0, 255, 186,
                                         255, 255, 255, 0, 186, 0};
    CHECK(decode_scanlines(png, 2, 6) == expect);

    SUBCASE("file writer emits the same bytes") {
        TempPath f(".png");
        write_png_rgb8(f.str(), img);
        CHECK(slurp(f.str()) == png);
    }
}

TEST_CASE("png gray8 stores bytes untouched") {
    Plane<uint8_t> img(3, 1, 0);
    img.at(0, 0) = 0;
    img.at(1, 0) = 77;
    img.at(2, 0) = 255;
    std::vector<uint8_t> png = encode_png_gray8(img);
    auto chunks = parse_chunks(png);
    CHECK(chunks[0].data[9] == 0);   // grayscale
    CHECK(chunks[0].data[8] == 8);
    CHECK(decode_scanlines(png, 1, 3) == std::vector<uint8_t>({0, 77, 255}));
}

TEST_CASE("png gray16 is big-endian and clamps") {
    Plane<int> img(3, 1, 0);
    img.at(0, 0) = 300;
    img.at(1, 0) = -5;
    img.at(2, 0) = 70000;
    std::vector<uint8_t> png = encode_png_gray16(img);
    auto chunks = parse_chunks(png);
    CHECK(chunks[0].data[8] == 16);
    CHECK(chunks[0].data[9] == 0);
    CHECK(decode_scanlines(png, 1, 6) ==
          std::vector<uint8_t>({0x01, 0x2c, 0x00, 0x00, 0xff, 0xff}));
}
