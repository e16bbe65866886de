#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "foi/types.hpp"

namespace foi {

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual int dimension() const = 0;
    // Unit-norm embeddings.
    virtual std::vector<double> embed_image(const Image& image) const = 0;
    virtual std::vector<double> embed_text(const std::string& text) const = 0;
};

// Cosine of the angle between a and b.
double image_similarity(std::span<const double> a, std::span<const double> b);

// cosine(image_edited - image_source, text_edited - text_source)
double directional_similarity(std::span<const double> image_source, std::span<const double> image_edited,
                              std::span<const double> text_source, std::span<const double> text_edited);

// Asset-free provider: images are embedded as a centered 8x8 RGB thumbnail,
// text as a hashed bag of words, both in 192 dimensions. Only useful for
// exercising the evaluation plumbing.
class ThumbnailEmbeddingProvider final : public EmbeddingProvider {
public:
    std::string name() const override { return "toy"; }
    int dimension() const override { return 192; }
    std::vector<double> embed_image(const Image& image) const override;
    std::vector<double> embed_text(const std::string& text) const override;
};

// "toy" is built in; "clip" and "dino" need pretrained encoders and raise
// BackendUnavailable.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& name);

struct EvalPair {
    std::string source_image;
    std::string edited_image;
    std::string source_caption;
    std::string edited_caption;
};

// {"pairs": [{"source_image", "edited_image", "source_caption"?, "edited_caption"?}, ...]};
// relative image paths resolve against the manifest's directory.
std::vector<EvalPair> read_eval_manifest(const std::string& path);

// CSV with header: index,source_image,edited_image,image_similarity,directional_similarity
// Directional similarity is left empty when captions are missing or a delta is zero.
std::string evaluate_pairs(const std::vector<EvalPair>& pairs, const EmbeddingProvider& provider);

}  // namespace foi
