#pragma once

#include <vector>

namespace foi {

// Discrete-time noise levels sigma(t) = sqrt((1 - abar_t) / abar_t) for the
// scaled-linear beta schedule used by latent diffusion models.
class NoiseSchedule {
public:
    static NoiseSchedule scaled_linear(int train_steps = 1000, double beta_start = 0.00085, double beta_end = 0.012);

    int train_steps() const { return static_cast<int>(sigmas_.size()); }
    // Linear interpolation between integer timesteps; t in [0, train_steps - 1].
    double sigma_at(double timestep) const;
    const std::vector<double>& sigmas() const { return sigmas_; }

private:
    std::vector<double> sigmas_;
};

}  // namespace foi
