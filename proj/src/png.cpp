#include "mvm/png.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace mvm {

namespace {

uint32_t crc32_table_entry(uint32_t n) {
    for (int k = 0; k < 8; ++k) n = (n & 1) ? 0xedb88320U ^ (n >> 1) : n >> 1;
    return n;
}

const std::array<uint32_t, 256>& crc_table() {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t n = 0; n < 256; ++n) t[n] = crc32_table_entry(n);
        return t;
    }();
    return table;
}

uint32_t crc32(const uint8_t* data, size_t len, uint32_t crc = 0xffffffffU) {
    for (size_t i = 0; i < len; ++i) crc = crc_table()[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return crc;
}

uint32_t adler32(const uint8_t* data, size_t len) {
    uint32_t a = 1, b = 0;
    for (size_t i = 0; i < len; ++i) {
        a = (a + data[i]) % 65521;
        b = (b + a) % 65521;
    }
    return (b << 16) | a;
}

void push_be32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(uint8_t(x >> 24));
    v.push_back(uint8_t(x >> 16));
    v.push_back(uint8_t(x >> 8));
    v.push_back(uint8_t(x));
}

void write_chunk(std::ofstream& out, const char type[4], const std::vector<uint8_t>& data) {
    std::vector<uint8_t> head;
    push_be32(head, static_cast<uint32_t>(data.size()));
    out.write(reinterpret_cast<const char*>(head.data()), 4);
    out.write(type, 4);
    if (!data.empty()) out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    uint32_t crc = crc32(reinterpret_cast<const uint8_t*>(type), 4);
    if (!data.empty()) crc = crc32(data.data(), data.size(), crc);
    std::vector<uint8_t> tail;
    push_be32(tail, crc ^ 0xffffffffU);
    out.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

Raster::Raster(Index h, Index w, uint8_t r, uint8_t g, uint8_t b) : height(h), width(w) {
    rgb.resize(static_cast<size_t>(h) * static_cast<size_t>(w) * 3);
    for (size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = r;
        rgb[i + 1] = g;
        rgb[i + 2] = b;
    }
}

void Raster::set(Index y, Index x, uint8_t r, uint8_t g, uint8_t b) {
    if (y < 0 || y >= height || x < 0 || x >= width) return;
    const size_t i = 3 * (static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x));
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
}

void write_png(const Raster& raster, const std::filesystem::path& path) {
    if (raster.height < 1 || raster.width < 1) throw ArgumentError("write_png: empty raster");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());

    static const uint8_t signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.write(reinterpret_cast<const char*>(signature), 8);

    std::vector<uint8_t> ihdr;
    push_be32(ihdr, static_cast<uint32_t>(raster.width));
    push_be32(ihdr, static_cast<uint32_t>(raster.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type: truecolor
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter
    ihdr.push_back(0);   // interlace
    write_chunk(out, "IHDR", ihdr);

    // scanlines with filter byte 0
    const size_t row_bytes = static_cast<size_t>(raster.width) * 3;
    std::vector<uint8_t> raw;
    raw.reserve((row_bytes + 1) * static_cast<size_t>(raster.height));
    for (Index y = 0; y < raster.height; ++y) {
        raw.push_back(0);
        const uint8_t* row = raster.rgb.data() + static_cast<size_t>(y) * row_bytes;
        raw.insert(raw.end(), row, row + row_bytes);
    }

    // zlib stream with stored deflate blocks
    std::vector<uint8_t> idat;
    idat.push_back(0x78);
    idat.push_back(0x01);
    size_t off = 0;
    while (off < raw.size()) {
        const size_t n = std::min<size_t>(65535, raw.size() - off);
        const bool final = off + n == raw.size();
        idat.push_back(final ? 1 : 0);
        idat.push_back(uint8_t(n & 0xff));
        idat.push_back(uint8_t(n >> 8));
        idat.push_back(uint8_t(~n & 0xff));
        idat.push_back(uint8_t((~n >> 8) & 0xff));
        idat.insert(idat.end(), raw.begin() + static_cast<std::ptrdiff_t>(off),
                    raw.begin() + static_cast<std::ptrdiff_t>(off + n));
        off += n;
    }
    push_be32(idat, adler32(raw.data(), raw.size()));
    write_chunk(out, "IDAT", idat);
    write_chunk(out, "IEND", {});
    if (!out) throw IoError("short write: " + path.string());
}

Raster to_raster(const ImageF& img, float lo, float hi) {
    Raster r(img.rows(), img.cols());
    const float scale = hi > lo ? 255.f / (hi - lo) : 0.f;
    for (Index y = 0; y < img.rows(); ++y)
        for (Index x = 0; x < img.cols(); ++x) {
            const float v = std::clamp((img(y, x) - lo) * scale, 0.f, 255.f);
            const auto g = static_cast<uint8_t>(v);
            r.set(y, x, g, g, g);
        }
    return r;
}

}  // namespace mvm
