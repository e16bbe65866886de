#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace foi {

struct LatentShape {
    int channels = 0;
    int height = 0;
    int width = 0;

    std::size_t size() const { return static_cast<std::size_t>(channels) * height * width; }
    friend bool operator==(const LatentShape&, const LatentShape&) = default;
};

// Channel-major latent tensor (C x H x W).
struct Latent {
    LatentShape shape;
    std::vector<double> data;

    Latent() = default;
    explicit Latent(LatentShape s, double fill = 0.0) : shape(s), data(s.size(), fill) {}

    double& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x]; }
    double at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x]; }
};

// heads x pixels x tokens, row-major; a "row" is one (head, pixel) pair over the token axis.
struct AttentionTensor {
    int heads = 0;
    int pixels = 0;
    int tokens = 0;
    std::vector<double> data;

    AttentionTensor() = default;
    AttentionTensor(int h, int p, int n, double fill = 0.0)
        : heads(h), pixels(p), tokens(n), data(static_cast<std::size_t>(h) * p * n, fill) {}

    std::size_t index(int h, int p, int j) const {
        return (static_cast<std::size_t>(h) * pixels + p) * tokens + j;
    }
    double& at(int h, int p, int j) { return data[index(h, p, j)]; }
    double at(int h, int p, int j) const { return data[index(h, p, j)]; }

    bool same_shape(const AttentionTensor& o) const {
        return heads == o.heads && pixels == o.pixels && tokens == o.tokens;
    }
};

// Row-major binary grid, entries in {0,1}.
struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> values;

    BinaryMask() = default;
    BinaryMask(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

    std::uint8_t& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto v : values) n += v;
        return n;
    }
    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// 8-bit interleaved RGB.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

    std::uint8_t& at(int y, int x, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::uint8_t at(int y, int x, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

}  // namespace foi
