#include "foi/capture.hpp"

#include <algorithm>
#include <string>

#include "foi/error.hpp"

namespace foi {

void normalize_min_max(std::vector<double>& values) {
    if (values.empty()) return;
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) {
        std::fill(values.begin(), values.end(), 0.0);
        return;
    }
    const double inv = 1.0 / (hi - lo);
    for (auto& v : values) v = std::clamp((v - lo) * inv, 0.0, 1.0);
}

CaptureSession::CaptureSession(std::set<Branch> branches, std::set<int> resolutions)
    : branches_(std::move(branches)), resolutions_(std::move(resolutions)) {}

void CaptureSession::observe(const AttentionRecord& record) {
    if (!branches_.contains(record.branch) || !resolutions_.contains(record.layer.resolution)) return;
    records_.push_back(record);
}

CaptureHook CaptureSession::hook() {
    return [this](const AttentionRecord& record) { observe(record); };
}

void CaptureSession::begin_step(int step_index) {
    if (!retain_) records_.clear();
    current_step_ = step_index;
}

CaptureSession open_capture(const DenoiserBackend& backend, std::set<Branch> branches, std::set<int> resolutions) {
    for (int r : resolutions) {
        if (!backend.has_resolution(r)) {
            throw Error(ErrorCode::UnsupportedResolution,
                        backend.name() + " backend has no cross-attention layer at r=" + std::to_string(r));
        }
    }
    return CaptureSession(std::move(branches), std::move(resolutions));
}

AveragedMap averaged_map(const CaptureSession& session, int resolution, Branch branch) {
    if (!session.resolutions().contains(resolution)) {
        throw Error(ErrorCode::UnsupportedResolution, "session does not capture r=" + std::to_string(resolution));
    }
    AveragedMap out;
    out.side = resolution;
    std::size_t slices = 0;
    for (const auto& rec : session.records()) {
        if (rec.branch != branch || rec.layer.resolution != resolution || rec.timestep_index != session.current_step()) {
            continue;
        }
        const auto& probs = rec.probs;
        if (probs.pixels != resolution * resolution) {
            throw Error(ErrorCode::ShapeMismatch, "record at " + rec.layer.name + " has wrong pixel count");
        }
        if (out.values.empty()) {
            out.tokens = probs.tokens;
            out.values.assign(static_cast<std::size_t>(probs.pixels) * probs.tokens, 0.0);
        } else if (probs.tokens != out.tokens) {
            throw Error(ErrorCode::ShapeMismatch, "records disagree on token count");
        }
        const std::size_t slice = out.values.size();
        for (int h = 0; h < probs.heads; ++h) {
            const double* src = probs.data.data() + static_cast<std::size_t>(h) * slice;
            for (std::size_t i = 0; i < slice; ++i) out.values[i] += src[i];
            ++slices;
        }
    }
    if (slices == 0) {
        throw Error(ErrorCode::NoRecords, "no " + std::string(branch_name(branch)) + " records at r=" +
                                              std::to_string(resolution) + " for step " +
                                              std::to_string(session.current_step()));
    }
    const double inv = 1.0 / static_cast<double>(slices);
    for (auto& v : out.values) v *= inv;
    return out;
}

SaliencyMap keyword_map(const AveragedMap& averaged, std::span<const int> indices) {
    if (indices.empty()) throw Error(ErrorCode::EmptyIndices, "keyword has no token indices");
    for (int j : indices) {
        if (j < 0 || j >= averaged.tokens) {
            throw Error(ErrorCode::InvalidArgument, "token index " + std::to_string(j) + " out of range");
        }
    }
    SaliencyMap map(averaged.side);
    const int pixels = averaged.side * averaged.side;
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (int p = 0; p < pixels; ++p) {
        double acc = 0.0;
        for (int j : indices) acc += averaged.at(p, j);
        map.values[static_cast<std::size_t>(p)] = acc * inv;
    }
    normalize_min_max(map.values);
    return map;
}

}  // namespace foi
