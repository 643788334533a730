#include "spct/pnm.hpp"

#include <cctype>
#include <fstream>

namespace spct {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            break;
        }
    }
    while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') tok.push_back(static_cast<char>(c));
    if (c == '#') {  // comment glued to the token; consume to end of line
        while ((c = in.get()) != EOF && c != '\n') {}
    }
    return tok;
}

int parse_dim(const std::string& tok, const char* what, const std::string& path) {
    if (tok.empty()) throw io_error(std::string("truncated header (missing ") + what + "): " + path);
    for (char ch : tok)
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw io_error(std::string("malformed ") + what + " '" + tok + "': " + path);
    long v = std::stol(tok);
    if (v <= 0 || v > 1 << 20) throw io_error(std::string("unreasonable ") + what + ": " + path);
    return static_cast<int>(v);
}

}  // namespace

LoadedImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open image: " + path);

    std::string magic = next_token(in);
    if (magic != "P5" && magic != "P6")
        throw io_error("unsupported magic '" + magic + "' (need P5/P6): " + path);

    int w = parse_dim(next_token(in), "width", path);
    int h = parse_dim(next_token(in), "height", path);
    int maxval = parse_dim(next_token(in), "maxval", path);
    if (maxval != 255) throw io_error("unsupported maxval (need 255): " + path);
    // The single whitespace byte after maxval was consumed by next_token.

    std::size_t pixels = static_cast<std::size_t>(w) * h;
    if (magic == "P5") {
        GrayImage img(w, h);
        in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(pixels));
        if (static_cast<std::size_t>(in.gcount()) != pixels)
            throw io_error("truncated pixel payload: " + path);
        return img;
    }
    ColorImage img(w, h);
    std::vector<std::uint8_t> raw(pixels * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw io_error("truncated pixel payload: " + path);
    for (std::size_t i = 0; i < pixels; ++i) {
        img.r[i] = raw[3 * i];
        img.g[i] = raw[3 * i + 1];
        img.b[i] = raw[3 * i + 2];
    }
    return img;
}

GrayImage load_gray(const std::string& path) {
    LoadedImage img = load_image(path);
    if (auto* g = std::get_if<GrayImage>(&img)) return std::move(*g);
    return to_grayscale(std::get<ColorImage>(img));
}

void save_image(const GrayImage& img, const std::string& path) {
    require(img.width > 0 && img.height > 0, "save_image: empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write image: " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw io_error("write failed: " + path);
}

void save_image(const ColorImage& img, const std::string& path) {
    require(img.width > 0 && img.height > 0, "save_image: empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write image: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> raw(img.r.size() * 3);
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        raw[3 * i] = img.r[i];
        raw[3 * i + 1] = img.g[i];
        raw[3 * i + 2] = img.b[i];
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw io_error("write failed: " + path);
}

void save_mask(const std::vector<std::uint8_t>& mask, int w, int h, const std::string& path) {
    require(mask.size() == static_cast<std::size_t>(w) * h, "save_mask: size mismatch");
    GrayImage img(w, h);
    for (std::size_t i = 0; i < mask.size(); ++i) img.data[i] = mask[i] ? 255 : 0;
    save_image(img, path);
}

}  // namespace spct
