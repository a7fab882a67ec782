#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "dyadnet/engine.hpp"
#include "dyadnet/errors.hpp"

namespace dyadnet {

struct LabeledSample {
    Image image;
    int label = 0;
};

struct LabeledDataset {
    std::vector<LabeledSample> samples;
    int class_count = 0;
    std::uint64_t digest = 0; // identifies the source data for comparisons
};

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

struct ByteReader {
    std::ifstream in;
    std::size_t offset = 0;
    std::string path;

    explicit ByteReader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw DataError("cannot open \"" + p + "\"");
    }

    void read(void* dst, std::size_t n) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw DataError(path + ": unexpected end of file at byte " +
                            std::to_string(offset + static_cast<std::size_t>(in.gcount())));
        offset += n;
    }

    std::uint32_t read_u32_be() {
        unsigned char b[4];
        read(b, 4);
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
               (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
    }
};

} // namespace detail

/// Pixel byte -> [-1, 1].
inline double normalize_pixel(unsigned char p) {
    return static_cast<double>(p) * (2.0 / 255.0) - 1.0;
}

/// IDX container pair (images + labels). Images come out normalized to
/// [-1, 1] at their native size; use adapt_to_shape for model input.
inline LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    detail::ByteReader imgs(images_path);
    std::uint32_t magic = imgs.read_u32_be();
    if (magic != 0x00000803u)
        throw DataError(images_path + ": bad magic " + std::to_string(magic) +
                        " (expected 2051 for an IDX image file)");
    std::uint32_t count = imgs.read_u32_be();
    std::uint32_t rows = imgs.read_u32_be();
    std::uint32_t cols = imgs.read_u32_be();

    detail::ByteReader labs(labels_path);
    std::uint32_t lmagic = labs.read_u32_be();
    if (lmagic != 0x00000801u)
        throw DataError(labels_path + ": bad magic " + std::to_string(lmagic) +
                        " (expected 2049 for an IDX label file)");
    std::uint32_t lcount = labs.read_u32_be();
    if (lcount != count)
        throw DataError("IDX length mismatch: " + std::to_string(count) + " images vs " +
                        std::to_string(lcount) + " labels");

    LabeledDataset ds;
    ds.samples.reserve(count);
    std::uint64_t h = 1469598103934665603ull;
    std::uint32_t dims[3] = {count, rows, cols};
    h = detail::fnv1a(h, dims, sizeof dims);

    std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
    int max_label = -1;
    for (std::uint32_t i = 0; i < count; ++i) {
        imgs.read(buf.data(), buf.size());
        unsigned char label = 0;
        labs.read(&label, 1);
        h = detail::fnv1a(h, buf.data(), buf.size());
        h = detail::fnv1a(h, &label, 1);
        LabeledSample s;
        s.label = label;
        s.image = Image(1, static_cast<int>(rows), static_cast<int>(cols));
        for (std::size_t p = 0; p < buf.size(); ++p) s.image.data[p] = normalize_pixel(buf[p]);
        max_label = std::max(max_label, static_cast<int>(label));
        ds.samples.push_back(std::move(s));
    }
    ds.class_count = max_label + 1;
    ds.digest = h;
    return ds;
}

/// Center pad (fill 0.0) or crop to the requested size.
inline Image adapt_to_shape(const Image& img, int height, int width) {
    if (img.height == height && img.width == width) return img;
    Image out(img.channels, height, width);
    int dr = (height - img.height) / 2;
    int dc = (width - img.width) / 2;
    for (int ch = 0; ch < img.channels; ++ch)
        for (int r = 0; r < img.height; ++r) {
            int tr = r + dr;
            if (tr < 0 || tr >= height) continue;
            for (int c = 0; c < img.width; ++c) {
                int tc = c + dc;
                if (tc < 0 || tc >= width) continue;
                out.at(ch, tr, tc) = img.at(ch, r, c);
            }
        }
    return out;
}

/// 8-bit grayscale PGM (binary P5 or ASCII P2), normalized to [-1, 1].
inline Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open \"" + path + "\"");
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P2") throw DataError(path + ": not a PGM file");
    auto next_token = [&]() -> long {
        // skip whitespace and '#' comment lines
        for (;;) {
            int ch = in.peek();
            if (ch == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(ch)) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        in >> v;
        if (!in) throw DataError(path + ": truncated PGM header");
        return v;
    };
    long w = next_token(), h = next_token(), maxval = next_token();
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw DataError(path + ": unsupported PGM geometry");
    Image img(1, static_cast<int>(h), static_cast<int>(w));
    if (magic == "P5") {
        in.get(); // single whitespace after maxval
        std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size())
            throw DataError(path + ": truncated PGM data");
        for (std::size_t i = 0; i < buf.size(); ++i)
            img.data[i] = static_cast<double>(buf[i]) * (2.0 / maxval) - 1.0;
    } else {
        for (auto& v : img.data) {
            long p = next_token();
            v = static_cast<double>(p) * (2.0 / maxval) - 1.0;
        }
    }
    return img;
}

} // namespace dyadnet
