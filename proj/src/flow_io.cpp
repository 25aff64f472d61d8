#include "denseflow/flow_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "denseflow/errors.hpp"

namespace denseflow {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0])
         | static_cast<std::uint32_t>(p[1]) << 8
         | static_cast<std::uint32_t>(p[2]) << 16
         | static_cast<std::uint32_t>(p[3]) << 24;
}

float get_f32(const std::uint8_t* p) {
    return std::bit_cast<float>(get_u32(p));
}

} // namespace

std::vector<std::uint8_t> write_flo(const FlowFieldf& flow) {
    if (!flow.all_finite()) {
        throw EncodingError("write_flo: flow contains non-finite components");
    }
    const Index w = flow.width();
    const Index h = flow.height();
    std::vector<std::uint8_t> bytes;
    bytes.reserve(12 + static_cast<size_t>(w * h) * 8);
    put_f32(bytes, kFloMagic);
    put_u32(bytes, static_cast<std::uint32_t>(w));
    put_u32(bytes, static_cast<std::uint32_t>(h));
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            put_f32(bytes, flow.u(y, x));
            put_f32(bytes, flow.v(y, x));
        }
    }
    return bytes;
}

FloContents read_flo(const std::uint8_t* data, std::size_t size) {
    if (size < 12) {
        throw FormatError("read_flo: stream too short for header ("
                          + std::to_string(size) + " bytes)");
    }
    const float magic = get_f32(data);
    if (magic != kFloMagic) {
        throw FormatError("read_flo: bad magic (expected 202021.25)");
    }
    const auto w = static_cast<std::int32_t>(get_u32(data + 4));
    const auto h = static_cast<std::int32_t>(get_u32(data + 8));
    if (w < 1 || h < 1) {
        throw FormatError("read_flo: invalid dimensions " + detail::dims_string(w, h));
    }
    const std::size_t expected = 12 + static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 8;
    if (size != expected) {
        throw FormatError("read_flo: truncated payload (expected "
                          + std::to_string(expected) + " bytes, got "
                          + std::to_string(size) + ")");
    }

    FloContents out;
    out.flow = zero_flow<float>(w, h);
    out.valid = Mask::Constant(h, w, true);
    const std::uint8_t* p = data + 12;
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            const float u = get_f32(p);
            const float v = get_f32(p + 4);
            p += 8;
            const bool unknown = !std::isfinite(u) || !std::isfinite(v)
                              || std::abs(u) > kUnknownFlowThreshold
                              || std::abs(v) > kUnknownFlowThreshold;
            out.flow.u(y, x) = std::isfinite(u) ? u : 0.0f;
            out.flow.v(y, x) = std::isfinite(v) ? v : 0.0f;
            out.valid(y, x) = !unknown;
        }
    }
    return out;
}

FloContents read_flo(const std::vector<std::uint8_t>& bytes) {
    return read_flo(bytes.data(), bytes.size());
}

void write_flo_file(const std::filesystem::path& path, const FlowFieldf& flow) {
    const std::vector<std::uint8_t> bytes = write_flo(flow);
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw IngestionError("cannot open " + path.string() + " for writing");
    }
    file.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    if (!file) {
        throw IngestionError("failed writing " + path.string());
    }
}

FloContents read_flo_file(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IngestionError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                    std::istreambuf_iterator<char>());
    try {
        return read_flo(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

const std::array<Rgb8, kWheelSize>& flow_color_wheel() {
    static const std::array<Rgb8, kWheelSize> wheel = [] {
        constexpr int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
        static_assert(RY + YG + GC + CB + BM + MR == kWheelSize);
        std::array<Rgb8, kWheelSize> w{};
        int k = 0;
        auto u8 = [](int v) { return static_cast<std::uint8_t>(v); };
        for (int i = 0; i < RY; ++i) w[k++] = {255, u8(255 * i / RY), 0};
        for (int i = 0; i < YG; ++i) w[k++] = {u8(255 - 255 * i / YG), 255, 0};
        for (int i = 0; i < GC; ++i) w[k++] = {0, 255, u8(255 * i / GC)};
        for (int i = 0; i < CB; ++i) w[k++] = {0, u8(255 - 255 * i / CB), 255};
        for (int i = 0; i < BM; ++i) w[k++] = {u8(255 * i / BM), 0, 255};
        for (int i = 0; i < MR; ++i) w[k++] = {255, 0, u8(255 - 255 * i / MR)};
        return w;
    }();
    return wheel;
}

Rgb8 flow_pixel_color(double u, double v, double max_magnitude) {
    const auto& wheel = flow_color_wheel();
    const double rad = std::min(1.0, std::hypot(u, v) / max_magnitude);
    const double angle = std::atan2(-v, -u) / std::numbers::pi; // in [-1, 1]
    const double fk = (angle + 1.0) / 2.0 * (kWheelSize - 1);
    const int k0 = static_cast<int>(fk);
    const int k1 = (k0 + 1) % kWheelSize;
    const double f = fk - k0;

    auto channel = [&](std::uint8_t c0, std::uint8_t c1) {
        double col = (1.0 - f) * (c0 / 255.0) + f * (c1 / 255.0);
        col = 1.0 - rad * (1.0 - col); // white center, saturation grows with radius
        return static_cast<std::uint8_t>(std::lround(255.0 * col));
    };
    return {channel(wheel[static_cast<size_t>(k0)].r, wheel[static_cast<size_t>(k1)].r),
            channel(wheel[static_cast<size_t>(k0)].g, wheel[static_cast<size_t>(k1)].g),
            channel(wheel[static_cast<size_t>(k0)].b, wheel[static_cast<size_t>(k1)].b)};
}

} // namespace denseflow
