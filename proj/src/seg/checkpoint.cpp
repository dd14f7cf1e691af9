#include "seg/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "core/error.hpp"

namespace slab {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(out, v);
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw FormatError("checkpoint truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[pos + i]);
        pos += 4;
        return v;
    }
    float f32() {
        std::uint32_t v = u32();
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_checkpoint(const SegModel& model, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(model.config.in_channels));
    put_u32(out, static_cast<std::uint32_t>(model.config.depth));
    put_u32(out, static_cast<std::uint32_t>(model.config.base_channels));
    put_u32(out, static_cast<std::uint32_t>(model.config.padding_mode));
    put_u32(out, static_cast<std::uint32_t>(model.config.kernel_size));
    put_u32(out, static_cast<std::uint32_t>(model.params.size()));
    for (const auto& [name, t] : model.params) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.append(name);
        put_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (int d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
        for (float v : t.data()) put_f32(out, v);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open checkpoint for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("failed writing checkpoint: " + path);
}

SegModel load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{buf};
    if (r.bytes(4) != std::string(kMagic, 4)) throw FormatError("bad checkpoint magic: " + path);
    std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
    }
    UNetConfig cfg;
    cfg.in_channels = static_cast<int>(r.u32());
    cfg.depth = static_cast<int>(r.u32());
    cfg.base_channels = static_cast<int>(r.u32());
    std::uint32_t mode = r.u32();
    if (mode > 3) throw FormatError("bad padding mode in checkpoint: " + path);
    cfg.padding_mode = static_cast<PaddingMode>(mode);
    cfg.kernel_size = static_cast<int>(r.u32());

    // Reference topology fixes the expected names and shapes.
    SegModel model = init_unet(cfg, 0);
    std::uint32_t n = r.u32();
    if (n != model.params.size()) {
        throw FormatError("checkpoint parameter count mismatch: " + path);
    }
    for (auto& [name, t] : model.params) {
        std::uint32_t len = r.u32();
        std::string got = r.bytes(len);
        if (got != name) {
            throw FormatError("checkpoint parameter order mismatch: expected '" + name + "', got '" +
                              got + "'");
        }
        std::uint32_t rank = r.u32();
        if (static_cast<int>(rank) != t.rank()) throw FormatError("checkpoint rank mismatch at " + name);
        for (int i = 0; i < t.rank(); ++i) {
            if (r.u32() != static_cast<std::uint32_t>(t.dim(i))) {
                throw FormatError("checkpoint shape mismatch at " + name);
            }
        }
        for (float& v : t.mut_data()) v = r.f32();
    }
    if (r.pos != buf.size()) throw FormatError("trailing bytes in checkpoint: " + path);
    return model;
}

}  // namespace slab
