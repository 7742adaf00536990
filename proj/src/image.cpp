#include "cofipara/image.hpp"

#include <cctype>
#include <fstream>

#include "cofipara/common.hpp"

namespace cofipara {

Image Image::filled(int height, int width, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Image img;
    img.height = height;
    img.width = width;
    img.data.resize(static_cast<std::size_t>(height) * width * 3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            img.at(y, x, 0) = r;
            img.at(y, x, 1) = g;
            img.at(y, x, 2) = b;
        }
    return img;
}

namespace {
// Skips whitespace and '#' comments between PPM header tokens.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(in.get()));
            return tok;
        }
    }
    return tok;
}
}  // namespace

Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open image file: " + path);
    std::string magic = next_token(in);
    if (magic != "P6")
        throw InputError("rejected non-RGB image (expected binary PPM 'P6'): " + path);
    int width = std::stoi(next_token(in));
    int height = std::stoi(next_token(in));
    int maxval = std::stoi(next_token(in));
    if (maxval != 255) throw InputError("rejected image with maxval != 255: " + path);
    in.get();  // single whitespace after header
    Image img;
    img.width = width;
    img.height = height;
    img.data.resize(static_cast<std::size_t>(width) * height * 3);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw InputError("truncated image file: " + path);
    return img;
}

void write_ppm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write image file: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
}

Image resize_square(const Image& img, int side) {
    if (img.empty()) throw InputError("cannot resize an empty image");
    if (img.height == side && img.width == side) return img;
    Image out;
    out.height = side;
    out.width = side;
    out.data.resize(static_cast<std::size_t>(side) * side * 3);
    for (int y = 0; y < side; ++y) {
        int sy = static_cast<int>(static_cast<long long>(y) * img.height / side);
        for (int x = 0; x < side; ++x) {
            int sx = static_cast<int>(static_cast<long long>(x) * img.width / side);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    }
    return out;
}

}  // namespace cofipara
