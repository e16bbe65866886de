#include "foi/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "foi/dump.hpp"
#include "foi/error.hpp"
#include "foi/image.hpp"
#include "foi/modulation.hpp"
#include "json.hpp"

namespace foi {

namespace fs = std::filesystem;

namespace {

std::string layer_stem(const std::string& name) {
    std::string out;
    for (char c : name) out.push_back(c == '.' ? '_' : c);
    return out;
}

// Gathers what the pipeline needs from a sampling run and forwards everything
// to an optional caller observer.
class PipelineObserver final : public SampleObserver {
public:
    PipelineObserver(const Instruction& instruction, SampleObserver* forward, bool keep_step0)
        : instruction_(instruction), forward_(forward), keep_step0_(keep_step0) {}

    void on_attention(int step, const AttentionRecord& record, bool modulated) override {
        if (forward_) forward_->on_attention(step, record, modulated);
        if (step == 0 && keep_step0_) step0_.push_back({record, modulated});
        if (modulated && !first_modulated_step_) first_modulated_step_ = step;
        if (modulated && step == *first_modulated_step_ && record.branch == Branch::Full) {
            accumulate(record);
        }
    }
    void on_masks(const std::vector<KeywordMask>& masks, const BinaryMask& union_mask) override {
        masks_ = &masks;
        sums_.assign(masks.size(), 0.0);
        counts_.assign(masks.size(), 0);
        if (forward_) forward_->on_masks(masks, union_mask);
    }
    void on_estimate(int step, const NoiseTriple& triple, const Latent& combined) override {
        if (forward_) forward_->on_estimate(step, triple, combined);
    }

    std::vector<double> keyword_attention() const {
        std::vector<double> out(sums_.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (counts_[i] > 0) out[i] = sums_[i] / static_cast<double>(counts_[i]);
        }
        return out;
    }

    struct Captured {
        AttentionRecord record;
        bool modulated;
    };
    const std::vector<Captured>& step0() const { return step0_; }

private:
    void accumulate(const AttentionRecord& record) {
        if (!masks_) return;
        const int side = record.layer.resolution;
        for (std::size_t i = 0; i < masks_->size(); ++i) {
            const BinaryMask layer_mask = resize_nearest((*masks_)[i].values, side, side);
            for (int h = 0; h < record.probs.heads; ++h) {
                for (int p = 0; p < record.probs.pixels; ++p) {
                    if (!layer_mask.values[static_cast<std::size_t>(p)]) continue;
                    for (int j : instruction_.keyword_token_indices[i]) {
                        sums_[i] += record.probs.at(h, p, j);
                        ++counts_[i];
                    }
                }
            }
        }
    }

    const Instruction& instruction_;
    SampleObserver* forward_;
    bool keep_step0_;
    const std::vector<KeywordMask>* masks_ = nullptr;
    std::optional<int> first_modulated_step_;
    std::vector<double> sums_;
    std::vector<std::size_t> counts_;
    std::vector<Captured> step0_;
};

void write_metadata(const fs::path& path, const EditRequest& request, const EditResult& result) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : result.steps) {
        steps.push_back({{"index", s.index},
                         {"timestep", s.timestep},
                         {"sigma", s.sigma},
                         {"t_norm", s.t_norm},
                         {"xi", s.xi},
                         {"phase", std::string(phase_name(s.phase))},
                         {"modulated", s.modulated}});
    }
    nlohmann::json masks = nlohmann::json::array();
    for (std::size_t i = 0; i < result.masks.size(); ++i) {
        const auto& m = result.masks[i];
        const double attention = i < result.keyword_attention.size() ? result.keyword_attention[i] : NAN;
        masks.push_back({{"sub_index", m.sub_index},
                         {"keyword", m.keyword},
                         {"tau", m.tau},
                         {"pixels", m.values.count()},
                         {"file", mask_filename(m)},
                         {"keyword_attention", std::isfinite(attention) ? nlohmann::json(attention) : nlohmann::json()}});
    }
    nlohmann::json meta = {
        {"instruction", request.instruction},
        {"backend", request.backend},
        {"seed", request.seed},
        {"original_size", {result.original_width, result.original_height}},
        {"working_size", {result.working_width, result.working_height}},
        {"masks", masks},
        {"union_pixels", result.union_mask.count()},
        {"steps", steps},
        {"warnings", result.warnings},
    };
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << meta.dump(2) << '\n';
}

}  // namespace

void EditRequest::validate() const {
    if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
    if (!(guidance.image_scale >= 0.0) || !(guidance.text_scale >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "guidance scales must be nonnegative");
    }
    extraction.validate();
}

EditResult edit_image(const Image& input, const EditRequest& request, const DenoiserBackend& backend,
                      SampleObserver* observer) {
    request.validate();
    const auto start = std::chrono::steady_clock::now();

    EditResult result;
    result.original_width = input.width;
    result.original_height = input.height;
    result.working_width = backend.image_width();
    result.working_height = backend.image_height();

    Instruction instruction = parse_edit_request(request.instruction, request.subs);
    instruction = resolve_token_spans(std::move(instruction), backend.tokenizer());

    ExtractionParams extraction = request.extraction;
    if (!extraction.tau && !extraction.rng_seed) extraction.rng_seed = request.seed;

    const Schedule schedule = make_schedule(request.steps, request.noise_start, request.disentangle_fraction, backend);
    const Image working = resize_bilinear(input, result.working_width, result.working_height);
    const Latent image_latent = backend.encode_image(working);

    PipelineObserver tap(instruction, observer, request.dump_dir.has_value());
    SampleResult sampled = sample(backend, image_latent, instruction, schedule, request.guidance, extraction,
                                  request.seed, &tap);

    result.output = resize_bilinear(backend.decode_latent(sampled.latent), input.width, input.height);
    result.masks = std::move(sampled.masks);
    result.union_mask = std::move(sampled.union_mask);
    result.steps = std::move(sampled.steps);
    result.warnings = std::move(sampled.warnings);
    result.keyword_attention = tap.keyword_attention();

    if (request.dump_dir) {
        const fs::path dir(*request.dump_dir);
        fs::create_directories(dir);
        if (!result.masks.empty()) write_mask_dump(dir, result.masks, result.union_mask);
        for (const auto& c : tap.step0()) {
            std::string stem = "step000_" + std::string(branch_name(c.record.branch)) + (c.modulated ? "_modulated_" : "_") +
                               layer_stem(c.record.layer.name);
            write_attention_dump(dir / "attention", stem, c.record, c.modulated);
        }
    }

    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (request.dump_dir) write_metadata(fs::path(*request.dump_dir) / "edit.json", request, result);
    return result;
}

EditResult edit(const EditRequest& request, const DenoiserBackend& backend, SampleObserver* observer) {
    if (request.image_path.empty()) throw Error(ErrorCode::InvalidArgument, "no input image given");
    const Image input = read_image(request.image_path);
    EditResult result = edit_image(input, request, backend, observer);
    if (!request.output_path.empty()) {
        const fs::path out(request.output_path);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_png(request.output_path, result.output);
    }
    return result;
}

EditResult edit(const EditRequest& request) {
    request.validate();
    auto backend = make_backend(request.backend);
    return edit(request, *backend);
}

}  // namespace foi
