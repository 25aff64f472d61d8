#include "denseflow/image_io.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <png.h>

#include "denseflow/errors.hpp"

namespace denseflow {

namespace {

// ---- PGM (binary P5) ----

int read_pgm_token(std::istream& in, const std::filesystem::path& path) {
    // skip whitespace and '#' comment lines between header fields
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) {
        throw FormatError(path.string() + ": malformed PGM header");
    }
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        if (value > 1 << 20) throw FormatError(path.string() + ": PGM header value out of range");
        c = in.get();
    }
    return value;
}

DecodedImage decode_pgm(std::ifstream& file, const std::filesystem::path& path) {
    char magic[2];
    file.read(magic, 2);
    if (!file || magic[0] != 'P' || magic[1] != '5') {
        throw FormatError(path.string() + ": not a binary PGM (P5) file");
    }
    DecodedImage out;
    out.width = read_pgm_token(file, path);
    out.height = read_pgm_token(file, path);
    const int maxval = read_pgm_token(file, path);
    if (out.width < 1 || out.height < 1) {
        throw FormatError(path.string() + ": invalid PGM dimensions");
    }
    if (maxval < 1 || maxval > 255) {
        throw FormatError(path.string() + ": only 8-bit PGM supported (maxval "
                          + std::to_string(maxval) + ")");
    }
    out.channels = 1;
    out.pixels.resize(static_cast<size_t>(out.width * out.height));
    file.read(reinterpret_cast<char*>(out.pixels.data()),
              static_cast<std::streamsize>(out.pixels.size()));
    if (file.gcount() != static_cast<std::streamsize>(out.pixels.size())) {
        throw FormatError(path.string() + ": truncated PGM payload");
    }
    return out;
}

// ---- PNG via libpng ----

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* file = nullptr;

    ~PngReader() {
        if (png != nullptr) png_destroy_read_struct(&png, info != nullptr ? &info : nullptr, nullptr);
        if (file != nullptr) std::fclose(file);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* file = nullptr;

    ~PngWriter() {
        if (png != nullptr) png_destroy_write_struct(&png, info != nullptr ? &info : nullptr);
        if (file != nullptr) std::fclose(file);
    }
};

DecodedImage decode_png(const std::filesystem::path& path) {
    PngReader r;
    r.file = std::fopen(path.c_str(), "rb");
    if (r.file == nullptr) {
        throw IngestionError("cannot open " + path.string());
    }
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = r.png != nullptr ? png_create_info_struct(r.png) : nullptr;
    if (r.info == nullptr) {
        throw IngestionError("libpng initialization failed for " + path.string());
    }

    DecodedImage out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(r.png))) {
        throw FormatError(path.string() + ": PNG decode failed");
    }
    png_init_io(r.png, r.file);
    png_read_info(r.png, r.info);

    png_set_strip_16(r.png);
    png_set_palette_to_rgb(r.png);
    png_set_expand_gray_1_2_4_to_8(r.png);
    png_set_strip_alpha(r.png);
    png_read_update_info(r.png, r.info);

    out.width = static_cast<Index>(png_get_image_width(r.png, r.info));
    out.height = static_cast<Index>(png_get_image_height(r.png, r.info));
    out.channels = static_cast<int>(png_get_channels(r.png, r.info));
    if (out.channels != 1 && out.channels != 3) {
        throw FormatError(path.string() + ": unsupported PNG channel count "
                          + std::to_string(out.channels));
    }
    out.pixels.resize(static_cast<size_t>(out.width * out.height) * static_cast<size_t>(out.channels));
    rows.resize(static_cast<size_t>(out.height));
    for (Index y = 0; y < out.height; ++y) {
        rows[static_cast<size_t>(y)] = out.pixels.data()
            + static_cast<size_t>(y) * static_cast<size_t>(out.width * out.channels);
    }
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return out;
}

void encode_png(const std::filesystem::path& path, Index width, Index height,
                int channels, const std::uint8_t* data) {
    PngWriter w;
    w.file = std::fopen(path.c_str(), "wb");
    if (w.file == nullptr) {
        throw IngestionError("cannot open " + path.string() + " for writing");
    }
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = w.png != nullptr ? png_create_info_struct(w.png) : nullptr;
    if (w.info == nullptr) {
        throw IngestionError("libpng initialization failed for " + path.string());
    }

    std::vector<png_const_bytep> rows(static_cast<size_t>(height));
    for (Index y = 0; y < height; ++y) {
        rows[static_cast<size_t>(y)] = data + static_cast<size_t>(y) * static_cast<size_t>(width * channels);
    }
    if (setjmp(png_jmpbuf(w.png))) {
        throw EncodingError(path.string() + ": PNG encode failed");
    }
    png_init_io(w.png, w.file);
    png_set_IHDR(w.png, w.info,
                 static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    for (Index y = 0; y < height; ++y) {
        png_write_row(w.png, rows[static_cast<size_t>(y)]);
    }
    png_write_end(w.png, nullptr);
}

} // namespace

DecodedImage decode_image_file(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IngestionError("cannot open " + path.string());
    }
    std::uint8_t magic[2] = {0, 0};
    file.read(reinterpret_cast<char*>(magic), 2);
    file.seekg(0);
    if (magic[0] == 'P' && magic[1] == '5') {
        return decode_pgm(file, path);
    }
    if (magic[0] == 0x89 && magic[1] == 'P') {
        file.close();
        return decode_png(path);
    }
    throw FormatError(path.string() + ": unsupported image format (need P5 PGM or PNG)");
}

void encode_pgm(const std::filesystem::path& path, Index width, Index height,
                const std::uint8_t* gray) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw IngestionError("cannot open " + path.string() + " for writing");
    }
    file << "P5\n" << width << " " << height << "\n255\n";
    file.write(reinterpret_cast<const char*>(gray),
               static_cast<std::streamsize>(width * height));
    if (!file) {
        throw IngestionError("failed writing " + path.string());
    }
}

void encode_png_gray8(const std::filesystem::path& path, Index width, Index height,
                      const std::uint8_t* gray) {
    encode_png(path, width, height, 1, gray);
}

void encode_png_rgb8(const std::filesystem::path& path, Index width, Index height,
                     const std::uint8_t* rgb) {
    encode_png(path, width, height, 3, rgb);
}

} // namespace denseflow
