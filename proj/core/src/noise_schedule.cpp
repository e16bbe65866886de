#include "foi/noise_schedule.hpp"

#include <algorithm>
#include <cmath>

#include "foi/error.hpp"

namespace foi {

NoiseSchedule NoiseSchedule::scaled_linear(int train_steps, double beta_start, double beta_end) {
    if (train_steps < 2) throw Error(ErrorCode::InvalidArgument, "noise schedule needs at least 2 steps");
    NoiseSchedule s;
    s.sigmas_.reserve(train_steps);
    const double a = std::sqrt(beta_start);
    const double b = std::sqrt(beta_end);
    double alpha_bar = 1.0;
    for (int i = 0; i < train_steps; ++i) {
        double root = a + (b - a) * i / (train_steps - 1);
        alpha_bar *= 1.0 - root * root;
        s.sigmas_.push_back(std::sqrt((1.0 - alpha_bar) / alpha_bar));
    }
    return s;
}

double NoiseSchedule::sigma_at(double timestep) const {
    double t = std::clamp(timestep, 0.0, static_cast<double>(sigmas_.size() - 1));
    auto lo = static_cast<std::size_t>(std::floor(t));
    auto hi = std::min(lo + 1, sigmas_.size() - 1);
    double w = t - static_cast<double>(lo);
    return (1.0 - w) * sigmas_[lo] + w * sigmas_[hi];
}

}  // namespace foi
