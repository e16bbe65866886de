#pragma once

#include <set>
#include <span>
#include <vector>

#include "foi/attention.hpp"
#include "foi/backend.hpp"

namespace foi {

// r x r map of reals, row-major.
struct SaliencyMap {
    int side = 0;
    std::vector<double> values;

    SaliencyMap() = default;
    explicit SaliencyMap(int r, double fill = 0.0) : side(r), values(static_cast<std::size_t>(r) * r, fill) {}

    double& at(int y, int x) { return values[static_cast<std::size_t>(y) * side + x]; }
    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * side + x]; }
};

// Min-max scaling to [0, 1]. A constant input (max == min) becomes all zeros.
void normalize_min_max(std::vector<double>& values);

// Probabilities averaged over heads and layers: (r*r) x N, row-major.
struct AveragedMap {
    int side = 0;
    int tokens = 0;
    std::vector<double> values;

    double at(int pixel, int token) const { return values[static_cast<std::size_t>(pixel) * tokens + token]; }
};

// Collects attention records for one edit run. Records from earlier steps are
// dropped by begin_step() unless retention is enabled.
class CaptureSession {
public:
    CaptureSession(std::set<Branch> branches, std::set<int> resolutions);

    void observe(const AttentionRecord& record);
    CaptureHook hook();

    void begin_step(int step_index);
    void set_retain(bool retain) { retain_ = retain; }
    void clear() { records_.clear(); }

    int current_step() const { return current_step_; }
    const std::vector<AttentionRecord>& records() const { return records_; }
    const std::set<Branch>& branches() const { return branches_; }
    const std::set<int>& resolutions() const { return resolutions_; }

private:
    std::set<Branch> branches_;
    std::set<int> resolutions_;
    std::vector<AttentionRecord> records_;
    int current_step_ = 0;
    bool retain_ = false;
};

// Throws UnsupportedResolution when the backend has no cross-attention layer at a requested r.
CaptureSession open_capture(const DenoiserBackend& backend, std::set<Branch> branches, std::set<int> resolutions);

AveragedMap averaged_map(const CaptureSession& session, int resolution, Branch branch);

// Mean of the keyword token columns, reshaped to r x r and min-max normalized.
SaliencyMap keyword_map(const AveragedMap& averaged, std::span<const int> keyword_token_indices);

}  // namespace foi
