#include <png.h>

#include <csetjmp>

#include "radsynth/mvol.hpp"
#include "radsynth/volume.hpp"

namespace radsynth {

namespace {

void append_to_buffer(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const SliceImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw Error(ErrorCode::BadParams, "slice image has inconsistent size");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoFailure, "libpng initialization failed");
  }
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoFailure, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, append_to_buffer, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int row = 0; row < image.height; ++row) {
    auto* ptr = const_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(row) * image.width);
    png_write_row(png, ptr);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const SliceImage& image, const std::string& path) {
  write_file_bytes(path, encode_png(image));
}

}  // namespace radsynth
