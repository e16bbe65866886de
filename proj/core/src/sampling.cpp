#include "foi/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "foi/capture.hpp"
#include "foi/error.hpp"
#include "foi/modulation.hpp"
#include "foi/random.hpp"

namespace foi {

namespace {

void check_triple(const NoiseTriple& t) {
    if (!(t.uncond.shape == t.image.shape) || !(t.image.shape == t.full.shape) ||
        t.uncond.data.size() != t.uncond.shape.size() || t.image.data.size() != t.uncond.data.size() ||
        t.full.data.size() != t.uncond.data.size()) {
        throw Error(ErrorCode::ShapeMismatch, "noise estimates differ in shape");
    }
}

bool fraction_ok(double f) { return std::isfinite(f) && f > 0.0 && f <= 1.0; }

}  // namespace

std::string_view phase_name(Phase phase) {
    return phase == Phase::Disentangle ? "disentangle" : "vanilla";
}

Latent combine_vanilla(const NoiseTriple& t, const GuidanceParams& g) {
    check_triple(t);
    Latent out(t.uncond.shape);
    // Expanded into one weight per estimate so unit scales return e_full exactly.
    const double wu = 1.0 - g.image_scale, wi = g.image_scale - g.text_scale, wf = g.text_scale;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = wu * t.uncond.data[i] + wi * t.image.data[i] + wf * t.full.data[i];
    }
    return out;
}

Latent combine_disentangled(const NoiseTriple& t, const GuidanceParams& g, const BinaryMask& mask) {
    check_triple(t);
    const LatentShape s = t.uncond.shape;
    if (mask.height != s.height || mask.width != s.width) {
        throw Error(ErrorCode::ShapeMismatch, "union mask does not match latent spatial size");
    }
    Latent out(s);
    const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
    const double wu = 1.0 - g.image_scale;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double wf = mask.values[i % plane] ? g.text_scale : 0.0;
        out.data[i] = wu * t.uncond.data[i] + (g.image_scale - wf) * t.image.data[i] + wf * t.full.data[i];
    }
    return out;
}

Schedule make_schedule(int configured_steps, double noise_start_fraction, double disentangle_fraction,
                       const DenoiserBackend& backend) {
    if (configured_steps < 1) throw Error(ErrorCode::BadFraction, "configured steps must be >= 1");
    if (!fraction_ok(noise_start_fraction)) throw Error(ErrorCode::BadFraction, "noise start fraction must lie in (0, 1]");
    if (!fraction_ok(disentangle_fraction)) throw Error(ErrorCode::BadFraction, "disentangle fraction must lie in (0, 1]");

    Schedule s;
    s.configured_steps = configured_steps;
    s.noise_start_fraction = noise_start_fraction;
    s.disentangle_fraction = disentangle_fraction;
    s.max_timestep = backend.max_timestep();
    s.effective_steps = static_cast<int>(std::lround(configured_steps * noise_start_fraction));
    if (s.effective_steps < 1) throw Error(ErrorCode::BadFraction, "noise start fraction leaves no steps to run");
    s.disentangle_cutoff = static_cast<int>(std::floor(s.effective_steps * disentangle_fraction + 1e-9));

    const NoiseSchedule& noise = backend.noise_schedule();
    const double last = noise.train_steps() - 1;
    const int skip = configured_steps - s.effective_steps;
    for (int i = skip; i < configured_steps; ++i) {
        const double t = configured_steps == 1 ? last : last * (1.0 - static_cast<double>(i) / (configured_steps - 1));
        s.timesteps.push_back(t);
        s.sigmas.push_back(noise.sigma_at(t));
    }
    s.sigmas.push_back(0.0);
    return s;
}

SampleResult sample(const DenoiserBackend& backend, const Latent& image_latent, const Instruction& instruction,
                    const Schedule& schedule, const GuidanceParams& guidance, const ExtractionParams& extraction,
                    std::uint64_t seed, SampleObserver* observer) {
    const LatentShape shape = backend.latent_shape();
    if (!(image_latent.shape == shape)) throw Error(ErrorCode::ShapeMismatch, "image latent does not match backend");
    if (schedule.effective_steps < 1 || schedule.timesteps.size() != static_cast<std::size_t>(schedule.effective_steps) ||
        schedule.sigmas.size() != schedule.timesteps.size() + 1) {
        throw Error(ErrorCode::InvalidArgument, "malformed schedule");
    }
    const bool has_subs = !instruction.subs.empty();
    if (has_subs && !instruction.resolved()) {
        throw Error(ErrorCode::SpanUnresolvable, "instruction token spans must be resolved before sampling");
    }
    extraction.validate();

    const std::vector<int> instruction_ids =
        instruction.token_ids.empty() ? backend.tokenizer().tokenize(instruction.composite_text).ids : instruction.token_ids;

    Rng rng(seed);
    SampleResult result;
    result.union_mask = BinaryMask(shape.height, shape.width, 1);

    Latent z(shape);
    for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] = image_latent.data[i] + schedule.sigmas[0] * rng.normal();

    std::optional<CrossConditionModulator> modulator;

    for (int step = 0; step < schedule.effective_steps; ++step) {
        const double t = schedule.timesteps[static_cast<std::size_t>(step)];
        const double sigma = schedule.sigmas[static_cast<std::size_t>(step)];
        const double sigma_next = schedule.sigmas[static_cast<std::size_t>(step) + 1];
        const double t_norm = schedule.t_norm(step);

        if (step == 0 && has_subs) {
            CaptureSession session = open_capture(backend, {Branch::Full}, {extraction.resolution});
            session.begin_step(step);
            ForwardHooks hooks;
            hooks.capture = [&](const AttentionRecord& rec) {
                session.observe(rec);
                if (observer) observer->on_attention(step, rec, false);
            };
            backend.predict({Branch::Full, z, t, sigma, step, image_latent, instruction_ids}, hooks);

            result.masks = extract_masks(session, instruction, extraction);
            result.union_mask = union_and_upsample(result.masks, shape.height, shape.width);
            if (result.union_mask.count() == 0) {
                result.warnings.push_back("MaskEmpty: every keyword mask is empty; edits are suppressed everywhere");
            }
            modulator.emplace(build_token_mask(result.masks, instruction, backend.token_length(), extraction.resolution),
                              build_alpha_vector(instruction));
            if (observer) observer->on_masks(result.masks, result.union_mask);
        }
        if (modulator) modulator->begin_step(t_norm);

        NoiseTriple triple;
        {
            ForwardHooks hooks;
            hooks.capture = [&](const AttentionRecord& rec) {
                if (modulator) modulator->cache_null_logits(rec);
                if (observer) observer->on_attention(step, rec, false);
            };
            triple.image = backend.predict({Branch::ImageOnly, z, t, sigma, step, image_latent, {}}, hooks);
        }
        {
            ForwardHooks hooks;
            if (modulator) hooks.modulate = modulator->hook();
            if (observer) {
                hooks.capture = [&](const AttentionRecord& rec) { observer->on_attention(step, rec, modulator.has_value()); };
            }
            triple.full = backend.predict({Branch::Full, z, t, sigma, step, image_latent, instruction_ids}, hooks);
        }
        {
            ForwardHooks hooks;
            if (observer) hooks.capture = [&](const AttentionRecord& rec) { observer->on_attention(step, rec, false); };
            triple.uncond = backend.predict({Branch::Uncond, z, t, sigma, step, image_latent, {}}, hooks);
        }

        const Phase phase = schedule.phase(step);
        Latent eps = phase == Phase::Disentangle ? combine_disentangled(triple, guidance, result.union_mask)
                                                 : combine_vanilla(triple, guidance);
        if (observer) observer->on_estimate(step, triple, eps);

        // Euler ancestral update (eta = 1).
        double sigma_up = 0.0;
        if (sigma_next > 0.0) {
            sigma_up = std::min(sigma_next, std::sqrt(sigma_next * sigma_next * (sigma * sigma - sigma_next * sigma_next) /
                                                      (sigma * sigma)));
        }
        const double sigma_down = std::sqrt(std::max(0.0, sigma_next * sigma_next - sigma_up * sigma_up));
        const double dt = sigma_down - sigma;
        for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] += eps.data[i] * dt;
        if (sigma_next > 0.0) {
            for (auto& v : z.data) v += sigma_up * rng.normal();
        }

        result.steps.push_back({step, t, sigma, t_norm, timestep_weight(t_norm), phase, modulator.has_value()});
    }
    result.latent = std::move(z);
    return result;
}

}  // namespace foi
