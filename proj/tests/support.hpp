#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <functional>

#include <gtest/gtest.h>

#include "foi/attention.hpp"
#include "foi/error.hpp"
#include "foi/random.hpp"
#include "foi/types.hpp"

namespace foi::testing {

inline ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no foi::Error thrown";
    return ErrorCode::InvalidArgument;
}

inline AttentionTensor random_logits(Rng& rng, int heads, int pixels, int tokens, double scale = 3.0) {
    AttentionTensor t(heads, pixels, tokens);
    for (auto& v : t.data) v = rng.normal() * scale;
    return t;
}

// Record whose probs are a given (pixels x tokens) table replicated over heads.
inline AttentionRecord record_from_table(const std::string& layer, int r, const std::vector<double>& table, int tokens,
                                         int heads = 1, Branch branch = Branch::Full, int step = 0) {
    AttentionRecord rec;
    rec.layer = {layer, r};
    rec.branch = branch;
    rec.timestep_index = step;
    rec.probs = AttentionTensor(heads, r * r, tokens);
    rec.logits = AttentionTensor(heads, r * r, tokens);
    for (int h = 0; h < heads; ++h) {
        for (int p = 0; p < r * r; ++p) {
            for (int j = 0; j < tokens; ++j) {
                rec.probs.at(h, p, j) = table[static_cast<std::size_t>(p) * tokens + j];
                rec.logits.at(h, p, j) = std::log(std::max(1e-300, table[static_cast<std::size_t>(p) * tokens + j]));
            }
        }
    }
    return rec;
}

// Smooth synthetic picture with distinct regions, 8x8 block-constant.
inline Image test_picture(int width = 128, int height = 128) {
    Image img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int by = y / 8, bx = x / 8;
            const bool sky = by < height / 16;
            const bool box = bx >= 4 && bx < 10 && by >= 5 && by < 11;
            img.at(y, x, 0) = static_cast<std::uint8_t>(box ? 200 : sky ? 90 : 60);
            img.at(y, x, 1) = static_cast<std::uint8_t>(box ? 80 : sky ? 140 : 160);
            img.at(y, x, 2) = static_cast<std::uint8_t>(box ? 40 : sky ? 220 : 60);
        }
    }
    return img;
}

class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("foi_test_" + name + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace foi::testing
