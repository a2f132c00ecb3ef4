#include "patchdet/codec.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

#include "patchdet/error.hpp"

namespace patchdet {

namespace {

struct JpegErrorContext {
    jpeg_error_mgr mgr;
    std::jmp_buf recovery;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_trampoline(j_common_ptr cinfo) {
    auto* ctx = reinterpret_cast<JpegErrorContext*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, ctx->message);
    std::longjmp(ctx->recovery, 1);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(ErrorCode::IoError, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

std::vector<std::uint8_t> jpeg_encode(const ImageBuffer& image, int quality) {
    require(quality >= 1 && quality <= 100, ErrorCode::InvalidParameter,
            "JPEG quality must be in [1, 100]");

    jpeg_compress_struct cinfo;
    JpegErrorContext err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_trampoline;

    unsigned char* out_buffer = nullptr;
    unsigned long out_size = 0;

    if (setjmp(err.recovery)) {
        jpeg_destroy_compress(&cinfo);
        if (out_buffer)
            free(out_buffer);
        raise(ErrorCode::CodecFailure, std::string("JPEG encode failed: ") + err.message);
    }

    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &out_buffer, &out_size);

    cinfo.image_width = static_cast<JDIMENSION>(image.width());
    cinfo.image_height = static_cast<JDIMENSION>(image.height());
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE /* force baseline */);
    jpeg_start_compress(&cinfo, TRUE);

    const std::size_t row_stride = static_cast<std::size_t>(image.width()) * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
        const JSAMPLE* row = image.data().data() + cinfo.next_scanline * row_stride;
        JSAMPROW rows[1] = {const_cast<JSAMPROW>(row)};
        jpeg_write_scanlines(&cinfo, rows, 1);
    }

    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);

    std::vector<std::uint8_t> bytes(out_buffer, out_buffer + out_size);
    free(out_buffer);
    return bytes;
}

ImageBuffer jpeg_decode(const std::vector<std::uint8_t>& bytes) {
    // Declared ahead of setjmp so the error path unwinds it normally.
    std::vector<std::uint8_t> pixels;
    int width = 0;
    int height = 0;

    jpeg_decompress_struct cinfo;
    JpegErrorContext err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_trampoline;

    if (setjmp(err.recovery)) {
        jpeg_destroy_decompress(&cinfo);
        raise(ErrorCode::CodecFailure, std::string("JPEG decode failed: ") + err.message);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    const std::size_t row_stride = static_cast<std::size_t>(width) * 3;
    pixels.assign(row_stride * static_cast<std::size_t>(height), 0);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels.data() + cinfo.output_scanline * row_stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return ImageBuffer(width, height, std::move(pixels));
}

void png_write_file(const std::string& path, const ImageBuffer& image) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp)
        raise(ErrorCode::IoError, "cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png)
            png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        raise(ErrorCode::CodecFailure, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        raise(ErrorCode::CodecFailure, "PNG write failed for " + path);
    }

    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const std::size_t row_stride = static_cast<std::size_t>(image.width()) * 3;
    for (int y = 0; y < image.height(); ++y)
        png_write_row(png, const_cast<png_bytep>(image.data().data() + y * row_stride));

    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

namespace {

DecodedImage png_read_file(const std::string& path) {
    std::vector<std::uint8_t> pixels;
    int width = 0;
    int height = 0;
    int source_channels = 3;

    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp)
        raise(ErrorCode::IoError, "cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png)
            png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        raise(ErrorCode::CodecFailure, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        raise(ErrorCode::CodecFailure, "PNG decode failed for " + path);
    }

    png_init_io(png, fp);
    png_read_info(png, info);

    source_channels = png_get_channels(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16)
        png_set_strip_16(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        raise(ErrorCode::CodecFailure, "unsupported PNG layout in " + path);
    }

    const std::size_t row_stride = static_cast<std::size_t>(width) * 3;
    pixels.assign(row_stride * static_cast<std::size_t>(height), 0);
    for (int y = 0; y < height; ++y)
        png_read_row(png, pixels.data() + static_cast<std::size_t>(y) * row_stride, nullptr);

    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return DecodedImage{ImageBuffer(width, height, std::move(pixels)), source_channels};
}

}  // namespace

DecodedImage load_image(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), "\x89PNG\r\n\x1a\n", 8) == 0)
        return png_read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) {
        jpeg_decompress_struct probe;
        JpegErrorContext err;
        probe.err = jpeg_std_error(&err.mgr);
        err.mgr.error_exit = jpeg_error_trampoline;
        if (setjmp(err.recovery)) {
            jpeg_destroy_decompress(&probe);
            raise(ErrorCode::CodecFailure, std::string("JPEG decode failed: ") + err.message);
        }
        jpeg_create_decompress(&probe);
        jpeg_mem_src(&probe, bytes.data(), static_cast<unsigned long>(bytes.size()));
        jpeg_read_header(&probe, TRUE);
        const int source_channels = probe.num_components;
        jpeg_destroy_decompress(&probe);
        return DecodedImage{jpeg_decode(bytes), source_channels};
    }
    raise(ErrorCode::CodecFailure, path + " is neither PNG nor JPEG");
}

}  // namespace patchdet
