#include "wavefuse/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <png.h>

namespace wavefuse {

namespace {

ImagePlanar from_bytes(const std::vector<unsigned char>& bytes, int h, int w, int c) {
    ImagePlanar img(h, w, c, c == 3 ? ColorSpace::Srgb : ColorSpace::Gray);
    // interleaved bytes -> planar doubles
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                img.at(ch, y, x) =
                    bytes[(static_cast<std::size_t>(y) * w + x) * c + ch] / 255.0;
    return img;
}

std::vector<unsigned char> to_bytes(const ImagePlanar& img) {
    std::vector<unsigned char> bytes(img.sample_count());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int ch = 0; ch < img.channels; ++ch) {
                const double v = std::clamp(img.at(ch, y, x), 0.0, 1.0);
                bytes[(static_cast<std::size_t>(y) * img.width + x) * img.channels + ch] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
    return bytes;
}

ImagePlanar load_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw Error(ErrorKind::Format, "load_image: not a decodable PNG: " + path);
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        throw Error(ErrorKind::Invalid, "load_image: zero-dimension image: " + path);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<unsigned char> bytes(static_cast<std::size_t>(PNG_IMAGE_SIZE(image)));
    png_color bg{255, 255, 255}; // alpha sources composite on white
    if (!png_image_finish_read(&image, &bg, bytes.data(), 0, nullptr)) {
        png_image_free(&image);
        throw Error(ErrorKind::Format, "load_image: corrupt PNG: " + path);
    }
    return from_bytes(bytes, static_cast<int>(image.height),
                      static_cast<int>(image.width), channels);
}

int pnm_next_token(std::istream& in) {
    // skips whitespace and '#' comments, returns a non-negative integer
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            ch = in.get();
        } else {
            break;
        }
    }
    if (ch == EOF || !std::isdigit(ch))
        throw Error(ErrorKind::Format, "load_image: malformed PNM header");
    long value = 0;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        if (value > 1 << 30)
            throw Error(ErrorKind::Format, "load_image: absurd PNM header value");
        ch = in.get();
    }
    if (ch != EOF) in.unget();
    return static_cast<int>(value);
}

ImagePlanar load_pnm(std::istream& in, int channels, const std::string& path) {
    const int w = pnm_next_token(in);
    const int h = pnm_next_token(in);
    const int maxval = pnm_next_token(in);
    if (w == 0 || h == 0)
        throw Error(ErrorKind::Invalid, "load_image: zero-dimension image: " + path);
    if (maxval != 255)
        throw Error(ErrorKind::Format, "load_image: only maxval 255 PNM supported: " + path);
    in.get(); // single whitespace after maxval
    std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w * channels);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw Error(ErrorKind::Format, "load_image: truncated PNM data: " + path);
    return from_bytes(bytes, h, w, channels);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return tail == suffix;
}

void save_pnm(const ImagePlanar& img, const std::string& path, bool color) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "save_image: cannot open " + path);
    out << (color ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n255\n";
    const auto bytes = to_bytes(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "save_image: write failed: " + path);
}

void save_png(const ImagePlanar& img, const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const auto bytes = to_bytes(img);
    if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr))
        throw Error(ErrorKind::Io, "save_image: PNG write failed: " + path);
}

} // namespace

ImagePlanar load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "load_image: cannot open " + path);
    unsigned char magic[8] = {0};
    in.read(reinterpret_cast<char*>(magic), 8);
    const std::streamsize got = in.gcount();
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (got >= 8 && std::equal(png_sig, png_sig + 8, magic)) {
        in.close();
        return load_png(path);
    }
    if (got >= 2 && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
        in.clear();
        in.seekg(2);
        return load_pnm(in, magic[1] == '6' ? 3 : 1, path);
    }
    throw Error(ErrorKind::Format, "load_image: unsupported format: " + path);
}

void save_image(const ImagePlanar& img, const std::string& path) {
    if (img.height <= 0 || img.width <= 0)
        throw Error(ErrorKind::Invalid, "save_image: empty image");
    if (has_suffix(path, ".png")) {
        save_png(img, path);
    } else if (has_suffix(path, ".ppm")) {
        if (img.channels != 3)
            throw Error(ErrorKind::Invalid, "save_image: PPM requires 3 channels");
        save_pnm(img, path, true);
    } else if (has_suffix(path, ".pgm")) {
        if (img.channels != 1)
            throw Error(ErrorKind::Invalid, "save_image: PGM requires 1 channel");
        save_pnm(img, path, false);
    } else {
        throw Error(ErrorKind::Format, "save_image: unsupported extension: " + path);
    }
}

} // namespace wavefuse
