#include "cli.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "foi/error.hpp"
#include "foi/metrics.hpp"

namespace foi::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EditFlags {
    std::string image, instruction, out, backend, dump, config, batch;
    std::vector<std::string> subs;
    std::uint64_t seed = 0;
    int steps = 0, gamma = 0, jobs = 1;
    double noise_start = 0, disentangle = 0, si = 0, st = 0, tau = 0;
    bool auto_subs = false;
};

struct EditOptions {
    CLI::Option *image, *instruction, *sub, *out, *seed, *backend, *steps, *noise_start, *disentangle, *si, *st, *gamma,
        *tau, *dump, *config;
};

void apply_flags(const EditFlags& f, const EditOptions& o, EditRequest& r) {
    if (o.image->count()) r.image_path = f.image;
    if (o.instruction->count()) r.instruction = f.instruction;
    if (o.sub->count()) {
        r.subs.clear();
        for (const auto& s : f.subs) r.subs.push_back(parse_sub_flag(s));
    }
    if (o.out->count()) r.output_path = f.out;
    if (o.seed->count()) r.seed = f.seed;
    if (o.backend->count()) r.backend = f.backend;
    if (o.steps->count()) r.steps = f.steps;
    if (o.noise_start->count()) r.noise_start = f.noise_start;
    if (o.disentangle->count()) r.disentangle_fraction = f.disentangle;
    if (o.si->count()) r.guidance.image_scale = f.si;
    if (o.st->count()) r.guidance.text_scale = f.st;
    if (o.gamma->count()) r.extraction.gamma = f.gamma;
    if (o.tau->count()) r.extraction.tau = f.tau;
    if (o.dump->count()) r.dump_dir = f.dump;
}

EditRequest build_request(const std::string& config_path, const EditFlags& f, const EditOptions& o) {
    EditRequest r;
    try {
        if (!config_path.empty()) apply_config(read_config(config_path), r);
        apply_flags(f, o, r);
        if (f.auto_subs && r.subs.empty()) r.subs = split_instruction(r.instruction);
        r.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        throw UsageError(e.what());
    }
    if (r.image_path.empty()) throw UsageError("--image is required");
    if (r.output_path.empty()) throw UsageError("--out is required");
    if (r.backend != "toy" && r.backend != "real") throw UsageError("--backend must be toy or real");
    return r;
}

void report(const EditRequest& r, const EditResult& result, std::mutex& io) {
    std::lock_guard lock(io);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << r.output_path << " (" << result.original_width << "x" << result.original_height << ", "
              << result.steps.size() << " steps, " << result.masks.size() << " masks, union "
              << result.union_mask.count() << "/" << result.union_mask.values.size() << " latent pixels, "
              << result.seconds << " s)\n";
    for (const auto& m : result.masks) {
        std::cout << "  mask " << m.sub_index << " '" << m.keyword << "': tau=" << m.tau << ", " << m.values.count()
                  << "/" << m.values.values.size() << " pixels\n";
    }
}

int run_edit(const EditFlags& f, const EditOptions& o) {
    std::vector<EditRequest> requests;
    if (!f.batch.empty()) {
        std::ifstream list(f.batch);
        if (!list) throw Error(ErrorCode::Io, "cannot open batch list " + f.batch);
        std::string line;
        while (std::getline(list, line)) {
            if (line.empty() || line.front() == '#') continue;
            requests.push_back(build_request(line, f, o));
        }
        if (requests.empty()) throw UsageError("batch list " + f.batch + " names no config files");
    } else {
        requests.push_back(build_request(f.config, f, o));
    }

    std::mutex io;
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < requests.size(); i = next++) {
            try {
                report(requests[i], edit(requests[i]), io);
            } catch (const std::exception& e) {
                std::lock_guard lock(io);
                std::cerr << "error: " << requests[i].image_path << ": " << e.what() << '\n';
                ++failures;
            }
        }
    };
    const int workers = std::max(1, std::min<int>(f.jobs, static_cast<int>(requests.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    return failures == 0 ? kExitOk : kExitRuntime;
}

int run_eval(const std::string& pairs, const std::string& provider_name, const std::string& out) {
    const auto provider = make_embedding_provider(provider_name);
    const std::string csv = evaluate_pairs(read_eval_manifest(pairs), *provider);
    if (out.empty()) {
        std::cout << csv;
    } else {
        std::ofstream file(out);
        if (!file) throw Error(ErrorCode::Io, "cannot write " + out);
        file << csv;
    }
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Instruction-based image editing with per-instruction attention masks"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    EditFlags f;
    EditOptions o{};
    auto* edit_cmd = app.add_subcommand("edit", "Edit an image following a composite instruction");
    o.image = edit_cmd->add_option("--image", f.image, "Input image (PNG or JPEG)");
    o.instruction = edit_cmd->add_option("--instruction", f.instruction, "Composite edit instruction");
    o.sub = edit_cmd->add_option("--sub", f.subs, "Sub-instruction as TEXT::KEYWORD[::ALPHA] (repeatable)");
    o.out = edit_cmd->add_option("--out", f.out, "Output PNG path");
    o.seed = edit_cmd->add_option("--seed", f.seed, "Sampling seed (default 42)");
    o.backend = edit_cmd->add_option("--backend", f.backend, "Denoiser backend: toy|real (default toy)");
    o.steps = edit_cmd->add_option("--steps", f.steps, "Configured denoising steps (default 100)");
    o.noise_start = edit_cmd->add_option("--noise-start", f.noise_start, "Fraction of noise added to the input (default 0.8)");
    o.disentangle = edit_cmd->add_option("--disentangle-frac", f.disentangle,
                                         "Fraction of effective steps using masked guidance (default 0.75)");
    o.si = edit_cmd->add_option("--si", f.si, "Image guidance scale (default 1.5)");
    o.st = edit_cmd->add_option("--st", f.st, "Text guidance scale (default 7.5)");
    o.gamma = edit_cmd->add_option("--gamma", f.gamma, "Mask enhancement iterations (default 3)");
    o.tau = edit_cmd->add_option("--tau", f.tau, "Mask threshold; unset samples from [0.4, 0.7] per keyword");
    o.dump = edit_cmd->add_option("--dump", f.dump, "Write masks, attention heatmaps and step metadata here");
    o.config = edit_cmd->add_option("--config", f.config, "key = value file; flags override it");
    edit_cmd->add_option("--batch", f.batch, "File listing one config path per line; each is a separate request");
    edit_cmd->add_option("--jobs", f.jobs, "Concurrent requests for --batch (default 1)")->check(CLI::PositiveNumber);
    edit_cmd->add_flag("--auto-subs", f.auto_subs, "Split the instruction at '.'/';' and use each piece's last word as keyword");

    std::string pairs, provider = "toy", eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "Score edited images against their sources");
    eval_cmd->add_option("--pairs", pairs, "JSON manifest of image pairs")->required();
    eval_cmd->add_option("--provider", provider, "Embedding provider: toy|clip|dino (default toy)");
    eval_cmd->add_option("--out", eval_out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (edit_cmd->parsed()) return run_edit(f, o);
        return run_eval(pairs, provider, eval_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << edit_cmd->help();
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace foi::cli
