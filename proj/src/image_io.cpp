#include "mblur/image_io.h"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mblur {

static_assert(std::endian::native == std::endian::little,
              "image writers assume a little-endian host");

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::runtime_error(path + ": " + msg);
}

void write_file(const std::string& path, const void* data, size_t size) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) fail(path, "write failed");
}

// --- PFM ---------------------------------------------------------------

void write_pfm_impl(const std::string& path, int w, int h, int channels,
                    const std::vector<float>& row_major) {
    std::ostringstream header;
    header << (channels == 3 ? "PF" : "Pf") << "\n" << w << " " << h << "\n-1.0\n";
    const std::string head = header.str();

    std::vector<char> blob;
    blob.reserve(head.size() + row_major.size() * sizeof(float));
    blob.insert(blob.end(), head.begin(), head.end());
    // Scanlines are stored bottom-up.
    const size_t row_floats = static_cast<size_t>(w) * channels;
    for (int y = h - 1; y >= 0; --y) {
        const char* row = reinterpret_cast<const char*>(row_major.data() + y * row_floats);
        blob.insert(blob.end(), row, row + row_floats * sizeof(float));
    }
    write_file(path, blob.data(), blob.size());
}

// --- PNG ---------------------------------------------------------------

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& data) {
    put_u32_be(out, static_cast<uint32_t>(data.size()));
    const size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + data.size()));
    put_u32_be(out, static_cast<uint32_t>(crc));
}

// color_type 0 = grayscale, 2 = RGB; raw holds filter-free scanlines.
std::vector<uint8_t> encode_png(int w, int h, int bit_depth, int color_type,
                                const std::vector<uint8_t>& raw, size_t row_bytes) {
    std::vector<uint8_t> filtered;
    filtered.reserve(raw.size() + static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) {
        filtered.push_back(0);  // filter type: none
        const uint8_t* row = raw.data() + static_cast<size_t>(y) * row_bytes;
        filtered.insert(filtered.end(), row, row + row_bytes);
    }

    uLongf bound = compressBound(static_cast<uLong>(filtered.size()));
    std::vector<uint8_t> deflated(bound);
    if (compress2(deflated.data(), &bound, filtered.data(), static_cast<uLong>(filtered.size()),
                  Z_BEST_SPEED) != Z_OK)
        throw std::runtime_error("png: deflate failed");
    deflated.resize(bound);

    std::vector<uint8_t> out;
    const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.insert(out.end(), sig, sig + 8);

    std::vector<uint8_t> ihdr;
    put_u32_be(ihdr, static_cast<uint32_t>(w));
    put_u32_be(ihdr, static_cast<uint32_t>(h));
    ihdr.push_back(static_cast<uint8_t>(bit_depth));
    ihdr.push_back(static_cast<uint8_t>(color_type));
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // no interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", deflated);
    put_chunk(out, "IEND", {});
    return out;
}

uint8_t to_srgb8(double linear) {
    return static_cast<uint8_t>(std::lround(std::pow(clamp01(linear), 1.0 / 2.2) * 255.0));
}

}  // namespace

void write_pfm(const std::string& path, const Plane<Vec3>& rgb) {
    std::vector<float> data;
    data.reserve(static_cast<size_t>(rgb.width()) * rgb.height() * 3);
    for (int y = 0; y < rgb.height(); ++y) {
        for (int x = 0; x < rgb.width(); ++x) {
            const Vec3& c = rgb.at(x, y);
            data.push_back(static_cast<float>(c.x));
            data.push_back(static_cast<float>(c.y));
            data.push_back(static_cast<float>(c.z));
        }
    }
    write_pfm_impl(path, rgb.width(), rgb.height(), 3, data);
}

void write_pfm(const std::string& path, const Plane<double>& gray) {
    std::vector<float> data;
    data.reserve(static_cast<size_t>(gray.width()) * gray.height());
    for (int y = 0; y < gray.height(); ++y)
        for (int x = 0; x < gray.width(); ++x) data.push_back(static_cast<float>(gray.at(x, y)));
    write_pfm_impl(path, gray.width(), gray.height(), 1, data);
}

void write_pfm(const std::string& path, const Plane<Vec2>& vec) {
    std::vector<float> data;
    data.reserve(static_cast<size_t>(vec.width()) * vec.height() * 3);
    for (int y = 0; y < vec.height(); ++y) {
        for (int x = 0; x < vec.width(); ++x) {
            const Vec2& v = vec.at(x, y);
            data.push_back(static_cast<float>(v.x));
            data.push_back(static_cast<float>(v.y));
            data.push_back(0.0f);
        }
    }
    write_pfm_impl(path, vec.width(), vec.height(), 3, data);
}

Plane<Vec3> read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");

    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if (!in || (magic != "PF" && magic != "Pf")) fail(path, "not a PFM file");
    if (w <= 0 || h <= 0) fail(path, "bad dimensions");
    if (scale >= 0.0) fail(path, "big-endian PFM unsupported");
    in.get();  // single whitespace byte after the scale line

    const int channels = magic == "PF" ? 3 : 1;
    const size_t row_floats = static_cast<size_t>(w) * channels;
    std::vector<float> row(row_floats);
    Plane<Vec3> img(w, h, Vec3{0, 0, 0});
    const double mag = -scale;

    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row_floats * sizeof(float)));
        if (!in) fail(path, "truncated pixel data");
        for (int x = 0; x < w; ++x) {
            if (channels == 3)
                img.at(x, y) = Vec3{row[3 * x] * mag, row[3 * x + 1] * mag, row[3 * x + 2] * mag};
            else
                img.at(x, y) = Vec3{row[x] * mag, row[x] * mag, row[x] * mag};
        }
    }
    return img;
}

std::vector<uint8_t> encode_png_rgb8(const Plane<Vec3>& linear) {
    const int w = linear.width(), h = linear.height();
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
    size_t i = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec3& c = linear.at(x, y);
            raw[i++] = to_srgb8(c.x);
            raw[i++] = to_srgb8(c.y);
            raw[i++] = to_srgb8(c.z);
        }
    }
    return encode_png(w, h, 8, 2, raw, static_cast<size_t>(w) * 3);
}

std::vector<uint8_t> encode_png_gray8(const Plane<uint8_t>& gray) {
    const int w = gray.width(), h = gray.height();
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h);
    size_t i = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) raw[i++] = gray.at(x, y);
    return encode_png(w, h, 8, 0, raw, static_cast<size_t>(w));
}

std::vector<uint8_t> encode_png_gray16(const Plane<int>& values) {
    const int w = values.width(), h = values.height();
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 2);
    size_t i = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int v = std::min(std::max(values.at(x, y), 0), 65535);
            raw[i++] = static_cast<uint8_t>(v >> 8);  // PNG samples are big-endian
            raw[i++] = static_cast<uint8_t>(v & 0xff);
        }
    }
    return encode_png(w, h, 16, 0, raw, static_cast<size_t>(w) * 2);
}

void write_png_rgb8(const std::string& path, const Plane<Vec3>& linear) {
    const std::vector<uint8_t> png = encode_png_rgb8(linear);
    write_file(path, png.data(), png.size());
}

void write_png_gray8(const std::string& path, const Plane<uint8_t>& gray) {
    const std::vector<uint8_t> png = encode_png_gray8(gray);
    write_file(path, png.data(), png.size());
}

void write_png_gray16(const std::string& path, const Plane<int>& values) {
    const std::vector<uint8_t> png = encode_png_gray16(values);
    write_file(path, png.data(), png.size());
}

}  // namespace mblur
