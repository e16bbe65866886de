#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <cstdio>
#include <jpeglib.h>

#include <gtest/gtest.h>

#include "foi/dump.hpp"
#include "foi/error.hpp"
#include "foi/image.hpp"
#include "foi/pipeline.hpp"
#include "foi/toy_backend.hpp"
#include "json.hpp"
#include "support.hpp"

namespace foi {
namespace {

namespace fs = std::filesystem;
using testing::code_of;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

EditRequest two_sub_request(const testing::TempDir& dir) {
    EditRequest r;
    r.image_path = dir.file("in.png");
    r.output_path = dir.file("out.png");
    r.instruction = "add a hat. make it sunset.";
    r.subs = {{"add a hat.", "hat", 1.0}, {"make it sunset.", "sunset", 1.0}};
    r.steps = 20;
    r.seed = 7;
    return r;
}

TEST(Edit, TwoSubsProduceMasksAndOutput) {
    testing::TempDir dir("edit_two");
    write_png(dir.file("in.png"), testing::test_picture(100, 60));
    auto req = two_sub_request(dir);
    req.dump_dir = dir.file("dump");
    auto res = edit(req);
    ASSERT_EQ(res.masks.size(), 2u);
    EXPECT_EQ(res.union_mask.height, 16);
    EXPECT_EQ(res.steps.size(), 16u);
    EXPECT_EQ(res.output.width, 100);
    EXPECT_EQ(res.output.height, 60);
    EXPECT_EQ(res.working_width, 128);
    EXPECT_EQ(res.original_width, 100);
    ASSERT_TRUE(fs::exists(dir.file("out.png")));
    auto out = read_image(dir.file("out.png"));
    EXPECT_EQ(out.width, 100);
    EXPECT_EQ(out.height, 60);

    const fs::path dump = dir.file("dump");
    for (const auto& m : res.masks) {
        auto png = read_image((dump / mask_filename(m)).string());
        EXPECT_EQ(png.width, 16);
        for (auto v : png.rgb) EXPECT_TRUE(v == 0 || v == 255);
    }
    auto un = read_image((dump / "union_mask.png").string());
    for (auto v : un.rgb) EXPECT_TRUE(v == 0 || v == 255);
    EXPECT_TRUE(fs::exists(dump / "attention" / "step000_full_down_attn.png"));
    EXPECT_TRUE(fs::exists(dump / "attention" / "step000_full_modulated_mid_attn_probs.f32"));
    EXPECT_TRUE(fs::exists(dump / "attention" / "step000_image_only_down_attn.json"));

    auto meta = nlohmann::json::parse(slurp(dump / "edit.json"));
    EXPECT_EQ(meta["steps"].size(), 16u);
    EXPECT_EQ(meta["steps"][0]["phase"], "disentangle");
    EXPECT_EQ(meta["masks"].size(), 2u);
    EXPECT_EQ(meta["original_size"][0], 100);
}

TEST(Edit, IdenticalRequestsGiveIdenticalFiles) {
    testing::TempDir dir("edit_det");
    write_png(dir.file("in.png"), testing::test_picture());
    auto a = two_sub_request(dir);
    a.dump_dir = dir.file("da");
    auto b = a;
    b.output_path = dir.file("out_b.png");
    b.dump_dir = dir.file("db");
    edit(a);
    edit(b);
    EXPECT_EQ(slurp(a.output_path), slurp(b.output_path));
    for (const auto& entry : fs::recursive_directory_iterator(dir.file("da"))) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir.file("da"));
        EXPECT_EQ(slurp(entry.path()), slurp(fs::path(dir.file("db")) / rel)) << rel;
    }
}

TEST(Edit, NoSubsHasNoMasks) {
    ToyBackend toy;
    EditRequest req;
    req.instruction = "make it sunset";
    req.steps = 10;
    auto res = edit_image(testing::test_picture(), req, toy);
    EXPECT_TRUE(res.masks.empty());
    EXPECT_EQ(res.union_mask.count(), 256u);
    EXPECT_TRUE(res.keyword_attention.empty());
}

TEST(Edit, KeywordAttentionRecorded) {
    ToyBackend toy;
    EditRequest req;
    req.instruction = "add a hat. make it sunset.";
    req.subs = {{"add a hat.", "hat", 1.0}, {"make it sunset.", "sunset", 2.5}};
    req.steps = 10;
    auto res = edit_image(testing::test_picture(), req, toy);
    ASSERT_EQ(res.keyword_attention.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        if (res.masks[i].values.count() == 0) continue;
        EXPECT_GT(res.keyword_attention[i], 0.0);
        EXPECT_LT(res.keyword_attention[i], 1.0);
    }
}

TEST(Edit, Errors) {
    ToyBackend toy;
    EditRequest req;
    req.instruction = "add a hat";
    req.subs = {{"add a hat", "dog", 1.0}};
    EXPECT_EQ(code_of([&] { edit_image(testing::test_picture(), req, toy); }), ErrorCode::KeywordNotFound);
    req.image_path = "/nonexistent/in.png";
    req.subs.clear();
    EXPECT_EQ(code_of([&] { edit(req, toy); }), ErrorCode::Io);
    req.steps = 0;
    EXPECT_EQ(code_of([&] { req.validate(); }), ErrorCode::InvalidArgument);
}

TEST(Dump, Float32RoundTripAndHeader) {
    testing::TempDir dir("dump");
    AttentionRecord rec;
    rec.layer = {"down.attn", 2};
    rec.branch = Branch::Full;
    rec.timestep_index = 0;
    rec.logits = AttentionTensor(1, 4, 2);
    rec.probs = AttentionTensor(1, 4, 2);
    rec.logits.data = {0.5, -1.25, 2.0, 3.0, -4.0, 0.0, 1.0, 8.0};
    rec.probs = softmax_rows(rec.logits, 1.0);
    write_attention_dump(dir.path(), "x", rec, true);
    auto logits = read_f32_le(dir.path() / "x_logits.f32");
    ASSERT_EQ(logits.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(logits[i], static_cast<float>(rec.logits.data[i]));
    auto probs = read_f32_le(dir.path() / "x_probs.f32");
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(probs[i], static_cast<float>(rec.probs.data[i]));
    // little-endian on disk regardless of host order
    const std::string raw = slurp(dir.path() / "x_logits.f32");
    EXPECT_EQ(raw.substr(0, 4), std::string("\x00\x00\x00\x3f", 4));

    auto header = nlohmann::json::parse(slurp(dir.path() / "x.json"));
    EXPECT_EQ(header["layer"], "down.attn");
    EXPECT_EQ(header["branch"], "full");
    EXPECT_EQ(header["heads"], 1);
    EXPECT_EQ(header["r"], 2);
    EXPECT_EQ(header["N"], 2);
    EXPECT_EQ(header["timestep"], 0);
    EXPECT_EQ(header["modulated"], true);
    auto png = read_image((dir.path() / "x.png").string());
    EXPECT_EQ(png.width, 4);
    EXPECT_EQ(png.height, 2);
}

void write_jpeg(const std::string& path, const Image& img) {
    jpeg_compress_struct cinfo;
    jpeg_error_mgr err;
    cinfo.err = jpeg_std_error(&err);
    jpeg_create_compress(&cinfo);
    FILE* f = std::fopen(path.c_str(), "wb");
    ASSERT_NE(f, nullptr);
    jpeg_stdio_dest(&cinfo, f);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, 100, TRUE);
    for (int c = 0; c < 3; ++c) cinfo.comp_info[c].h_samp_factor = cinfo.comp_info[c].v_samp_factor = 1;
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(img.rgb.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width * 3);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(f);
}

TEST(Image, PngRoundTripAndJpegDecode) {
    testing::TempDir dir("image");
    const Image img = testing::test_picture(32, 16);
    write_png(dir.file("a.png"), img);
    EXPECT_EQ(read_image(dir.file("a.png")).rgb, img.rgb);
    write_jpeg(dir.file("a.jpg"), img);
    const Image jpg = read_image(dir.file("a.jpg"));
    ASSERT_EQ(jpg.width, 32);
    ASSERT_EQ(jpg.height, 16);
    for (std::size_t i = 0; i < img.rgb.size(); ++i) EXPECT_NEAR(jpg.rgb[i], img.rgb[i], 24) << i;
    EXPECT_EQ(code_of([&] { read_image(dir.file("missing.png")); }), ErrorCode::Io);
}

TEST(Image, BilinearResizeIdentityAndConstant) {
    const Image img = testing::test_picture(32, 16);
    EXPECT_EQ(resize_bilinear(img, 32, 16).rgb, img.rgb);
    Image gray(10, 7, 77);
    for (auto v : resize_bilinear(gray, 23, 5).rgb) EXPECT_EQ(v, 77);
}

}  // namespace
}  // namespace foi
