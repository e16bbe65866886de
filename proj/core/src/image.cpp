#include "foi/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "foi/error.hpp"

namespace foi {

namespace {

Image read_png(const std::string& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        throw Error(ErrorCode::Io, "cannot read PNG " + path + ": " + png.message);
    }
    png.format = PNG_FORMAT_RGB;
    Image image(static_cast<int>(png.width), static_cast<int>(png.height));
    if (!png_image_finish_read(&png, nullptr, image.rgb.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw Error(ErrorCode::Io, "cannot decode PNG " + path + ": " + msg);
    }
    return image;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

Image read_jpeg(const std::string& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!file) throw Error(ErrorCode::Io, "cannot open " + path);

    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    Image image;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorCode::Io, "cannot decode JPEG " + path + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    image = Image(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = image.rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * image.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return image;
}

void write_png_raw(const std::string& path, int width, int height, png_uint_32 format, const std::uint8_t* pixels) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(width);
    png.height = static_cast<png_uint_32>(height);
    png.format = format;
    if (!png_image_write_to_file(&png, path.c_str(), 0, pixels, 0, nullptr)) {
        throw Error(ErrorCode::Io, "cannot write PNG " + path + ": " + png.message);
    }
}

}  // namespace

Image read_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::array<unsigned char, 8> sig{};
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    if (in.gcount() >= 8 && png_sig_cmp(sig.data(), 0, 8) == 0) return read_png(path);
    if (in.gcount() >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return read_jpeg(path);
    throw Error(ErrorCode::Io, path + " is neither PNG nor JPEG");
}

void write_png(const std::string& path, const Image& image) {
    write_png_raw(path, image.width, image.height, PNG_FORMAT_RGB, image.rgb.data());
}

void write_png_gray(const std::string& path, int width, int height, const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != static_cast<std::size_t>(width) * height) {
        throw Error(ErrorCode::ShapeMismatch, "gray image buffer has wrong size");
    }
    write_png_raw(path, width, height, PNG_FORMAT_GRAY, pixels.data());
}

void write_mask_png(const std::string& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> pixels(mask.values.size());
    std::transform(mask.values.begin(), mask.values.end(), pixels.begin(),
                   [](std::uint8_t v) -> std::uint8_t { return v ? 255 : 0; });
    write_png_gray(path, mask.width, mask.height, pixels);
}

Image resize_bilinear(const Image& src, int width, int height) {
    if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "resize target must be positive");
    if (src.width == width && src.height == height) return src;
    Image out(width, height);
    const double sx = static_cast<double>(src.width) / width;
    const double sy = static_cast<double>(src.height) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = (1 - wx) * src.at(y0, x0, c) + wx * src.at(y0, x1, c);
                const double bottom = (1 - wx) * src.at(y1, x0, c) + wx * src.at(y1, x1, c);
                out.at(y, x, c) = static_cast<std::uint8_t>(std::lround(std::clamp((1 - wy) * top + wy * bottom, 0.0, 255.0)));
            }
        }
    }
    return out;
}

}  // namespace foi
