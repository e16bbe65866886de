#include "foi/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "foi/error.hpp"
#include "foi/image.hpp"
#include "json.hpp"

namespace foi {

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine(std::span<const double> a, std::span<const double> b, ErrorCode zero_code) {
    if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "vectors differ in dimension");
    const double na = norm(a), nb = norm(b);
    if (!(na > 0.0) || !(nb > 0.0)) throw Error(zero_code, "cosine of a zero vector is undefined");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "vectors differ in dimension");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

void normalize(std::vector<double>& v) {
    const double n = norm(v);
    if (n > 0.0) {
        for (auto& x : v) x /= n;
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

double image_similarity(std::span<const double> a, std::span<const double> b) {
    return cosine(a, b, ErrorCode::ZeroVector);
}

double directional_similarity(std::span<const double> image_source, std::span<const double> image_edited,
                              std::span<const double> text_source, std::span<const double> text_edited) {
    const auto image_delta = difference(image_edited, image_source);
    const auto text_delta = difference(text_edited, text_source);
    return cosine(image_delta, text_delta, ErrorCode::ZeroDelta);
}

std::vector<double> ThumbnailEmbeddingProvider::embed_image(const Image& image) const {
    const Image thumb = resize_bilinear(image, 8, 8);
    std::vector<double> v(192);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = thumb.rgb[i] / 255.0 - 0.5;
    // 8-bit values never equal 127.5, so no entry is zero.
    normalize(v);
    return v;
}

std::vector<double> ThumbnailEmbeddingProvider::embed_text(const std::string& text) const {
    std::vector<double> v(192, 0.0);
    std::istringstream words(text);
    std::string word;
    while (words >> word) {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : word) {
            if (!std::isalnum(c)) continue;
            h ^= static_cast<unsigned char>(std::tolower(c));
            h *= 1099511628211ull;
        }
        v[h % v.size()] += ((h >> 32) & 1) ? 1.0 : -1.0;
    }
    normalize(v);
    return v;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& name) {
    if (name == "toy") return std::make_unique<ThumbnailEmbeddingProvider>();
    if (name == "clip" || name == "dino") {
        throw Error(ErrorCode::BackendUnavailable, "the '" + name + "' provider needs pretrained encoder weights");
    }
    throw Error(ErrorCode::InvalidArgument, "unknown embedding provider '" + name + "'");
}

std::vector<EvalPair> read_eval_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "bad manifest " + path + ": " + e.what());
    }
    if (!j.contains("pairs") || !j["pairs"].is_array()) {
        throw Error(ErrorCode::InvalidArgument, "manifest needs a \"pairs\" array");
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? p : (base / fp).string();
    };
    std::vector<EvalPair> pairs;
    for (const auto& item : j["pairs"]) {
        if (!item.contains("source_image") || !item.contains("edited_image")) {
            throw Error(ErrorCode::InvalidArgument, "each pair needs source_image and edited_image");
        }
        EvalPair pair;
        pair.source_image = resolve(item["source_image"].get<std::string>());
        pair.edited_image = resolve(item["edited_image"].get<std::string>());
        pair.source_caption = item.value("source_caption", "");
        pair.edited_caption = item.value("edited_caption", "");
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

std::string evaluate_pairs(const std::vector<EvalPair>& pairs, const EmbeddingProvider& provider) {
    std::ostringstream csv;
    csv << "index,source_image,edited_image,image_similarity,directional_similarity\n";
    csv << std::setprecision(6) << std::fixed;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        const auto src = provider.embed_image(read_image(p.source_image));
        const auto dst = provider.embed_image(read_image(p.edited_image));
        csv << i << ',' << csv_field(p.source_image) << ',' << csv_field(p.edited_image) << ','
            << image_similarity(src, dst) << ',';
        if (!p.source_caption.empty() && !p.edited_caption.empty()) {
            try {
                csv << directional_similarity(src, dst, provider.embed_text(p.source_caption),
                                              provider.embed_text(p.edited_caption));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ZeroDelta) throw;
            }
        }
        csv << '\n';
    }
    return csv.str();
}

}  // namespace foi
