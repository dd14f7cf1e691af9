#include "image/png_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/error.hpp"

namespace slab {

namespace {

constexpr unsigned char kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_u32be(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::string& out, const char type[4], const std::string& payload) {
    put_u32be(out, static_cast<std::uint32_t>(payload.size()));
    std::string body(type, 4);
    body += payload;
    out += body;
    std::uint32_t crc = static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
    put_u32be(out, crc);
}

std::string zlib_compress(const std::string& raw) {
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string out(bound, '\0');
    int rc = compress2(reinterpret_cast<Bytef*>(out.data()), &bound,
                       reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()), 6);
    if (rc != Z_OK) throw IoError("png: zlib compression failed");
    out.resize(bound);
    return out;
}

std::string zlib_uncompress(const std::string& compressed, std::size_t expected) {
    std::string out(expected, '\0');
    uLongf len = static_cast<uLongf>(expected);
    int rc = uncompress(reinterpret_cast<Bytef*>(out.data()), &len,
                        reinterpret_cast<const Bytef*>(compressed.data()),
                        static_cast<uLong>(compressed.size()));
    if (rc != Z_OK || len != expected) throw FormatError("png: corrupt compressed image data");
    return out;
}

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw FormatError("png truncated: " + path);
    }
    std::uint32_t u32be() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(buf[pos + i]);
        pos += 4;
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

void write_png(const std::string& path, const Tensor& image) {
    int channels, h, w;
    if (image.rank() == 2) {
        channels = 1;
        h = image.dim(0);
        w = image.dim(1);
    } else if (image.rank() == 3 && (image.dim(0) == 1 || image.dim(0) == 3)) {
        channels = image.dim(0);
        h = image.dim(1);
        w = image.dim(2);
    } else {
        throw DomainError("write_png: expected [H,W], [1,H,W] or [3,H,W], got " +
                          shape_to_string(image.shape()));
    }

    auto px = image.data();
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    std::string raw;
    raw.reserve(static_cast<std::size_t>(h) * (1 + static_cast<std::size_t>(w) * channels));
    for (int y = 0; y < h; ++y) {
        raw.push_back('\0');  // filter: none
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < channels; ++c) {
                float v = px[c * plane + static_cast<std::int64_t>(y) * w + x];
                v = std::min(1.0f, std::max(0.0f, v));
                raw.push_back(static_cast<char>(std::lround(v * 255.0f)));
            }
        }
    }

    std::string out(reinterpret_cast<const char*>(kSignature), 8);
    std::string ihdr;
    put_u32be(ihdr, static_cast<std::uint32_t>(w));
    put_u32be(ihdr, static_cast<std::uint32_t>(h));
    ihdr.push_back(8);                                // bit depth
    ihdr.push_back(channels == 1 ? 0 : 2);            // gray / truecolor
    ihdr.push_back(0);                                // compression
    ihdr.push_back(0);                                // filter
    ihdr.push_back(0);                                // no interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", zlib_compress(raw));
    put_chunk(out, "IEND", "");

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("failed writing: " + path);
}

Tensor read_png(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (buf.size() < 8 || std::memcmp(buf.data(), kSignature, 8) != 0) {
        throw FormatError("not a png: " + path);
    }
    ByteReader r{buf, 8, path};

    std::uint32_t width = 0, height = 0;
    int bit_depth = 0, color_type = 0, interlace = 0;
    std::string idat;
    std::string palette;
    bool saw_ihdr = false, saw_iend = false;
    while (!saw_iend) {
        std::uint32_t len = r.u32be();
        std::string type = r.bytes(4);
        std::string payload = r.bytes(len);
        r.u32be();  // crc, not verified
        if (type == "IHDR") {
            if (len != 13) throw FormatError("png: bad IHDR: " + path);
            width = (static_cast<std::uint32_t>(static_cast<unsigned char>(payload[0])) << 24) |
                    (static_cast<std::uint32_t>(static_cast<unsigned char>(payload[1])) << 16) |
                    (static_cast<std::uint32_t>(static_cast<unsigned char>(payload[2])) << 8) |
                    static_cast<std::uint32_t>(static_cast<unsigned char>(payload[3]));
            height = (static_cast<std::uint32_t>(static_cast<unsigned char>(payload[4])) << 24) |
                     (static_cast<std::uint32_t>(static_cast<unsigned char>(payload[5])) << 16) |
                     (static_cast<std::uint32_t>(static_cast<unsigned char>(payload[6])) << 8) |
                     static_cast<std::uint32_t>(static_cast<unsigned char>(payload[7]));
            bit_depth = static_cast<unsigned char>(payload[8]);
            color_type = static_cast<unsigned char>(payload[9]);
            interlace = static_cast<unsigned char>(payload[12]);
            saw_ihdr = true;
        } else if (type == "PLTE") {
            palette = payload;
        } else if (type == "IDAT") {
            idat += payload;
        } else if (type == "IEND") {
            saw_iend = true;
        }
        // ancillary chunks are skipped
    }
    if (!saw_ihdr || width == 0 || height == 0) throw FormatError("png: missing IHDR: " + path);
    if (bit_depth != 8) {
        throw FormatError("png: only 8-bit depth supported, got " + std::to_string(bit_depth) + ": " +
                          path);
    }
    if (interlace != 0) throw FormatError("png: interlaced files not supported: " + path);

    int src_channels;
    switch (color_type) {
        case 0: src_channels = 1; break;  // gray
        case 2: src_channels = 3; break;  // rgb
        case 3: src_channels = 1; break;  // palette index
        case 4: src_channels = 2; break;  // gray + alpha
        case 6: src_channels = 4; break;  // rgba
        default: throw FormatError("png: unsupported color type: " + path);
    }
    if (color_type == 3 && palette.empty()) throw FormatError("png: palette missing: " + path);

    const std::size_t stride = static_cast<std::size_t>(width) * src_channels;
    std::string raw = zlib_uncompress(idat, (stride + 1) * height);

    // Undo per-row filters in place.
    std::vector<unsigned char> img(stride * height);
    const int bpp = src_channels;
    for (std::uint32_t y = 0; y < height; ++y) {
        int filter = static_cast<unsigned char>(raw[y * (stride + 1)]);
        const unsigned char* src =
            reinterpret_cast<const unsigned char*>(raw.data()) + y * (stride + 1) + 1;
        unsigned char* dst = img.data() + y * stride;
        const unsigned char* prev = (y > 0) ? img.data() + (y - 1) * stride : nullptr;
        for (std::size_t x = 0; x < stride; ++x) {
            int a = (x >= static_cast<std::size_t>(bpp)) ? dst[x - bpp] : 0;
            int b = prev ? prev[x] : 0;
            int c = (prev && x >= static_cast<std::size_t>(bpp)) ? prev[x - bpp] : 0;
            int v;
            switch (filter) {
                case 0: v = src[x]; break;
                case 1: v = src[x] + a; break;
                case 2: v = src[x] + b; break;
                case 3: v = src[x] + (a + b) / 2; break;
                case 4: v = src[x] + paeth(a, b, c); break;
                default: throw FormatError("png: bad filter type: " + path);
            }
            dst[x] = static_cast<unsigned char>(v & 0xff);
        }
    }

    const int out_channels = (color_type == 0 || color_type == 4) ? 1 : 3;
    Tensor out = Tensor::zeros({out_channels, static_cast<int>(height), static_cast<int>(width)});
    auto po = out.mut_data();
    const std::int64_t plane = static_cast<std::int64_t>(height) * width;
    for (std::uint32_t y = 0; y < height; ++y) {
        for (std::uint32_t x = 0; x < width; ++x) {
            const unsigned char* p = img.data() + y * stride + static_cast<std::size_t>(x) * bpp;
            std::int64_t at = static_cast<std::int64_t>(y) * width + x;
            switch (color_type) {
                case 0:
                case 4:
                    po[at] = p[0] / 255.0f;
                    break;
                case 2:
                case 6:
                    po[at] = p[0] / 255.0f;
                    po[plane + at] = p[1] / 255.0f;
                    po[2 * plane + at] = p[2] / 255.0f;
                    break;
                case 3: {
                    std::size_t idx = static_cast<std::size_t>(p[0]) * 3;
                    if (idx + 2 >= palette.size()) throw FormatError("png: palette index out of range: " + path);
                    po[at] = static_cast<unsigned char>(palette[idx]) / 255.0f;
                    po[plane + at] = static_cast<unsigned char>(palette[idx + 1]) / 255.0f;
                    po[2 * plane + at] = static_cast<unsigned char>(palette[idx + 2]) / 255.0f;
                    break;
                }
            }
        }
    }
    return out;
}

}  // namespace slab
