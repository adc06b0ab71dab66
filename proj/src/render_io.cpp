#include "symplane/errors.h"
#include "symplane/render.h"

#include "binary_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace symplane {

void write_png(const GrayImage& image, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!file) {
    throw Error("cannot write " + path.string());
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialisation failed");
  }
  std::vector<png_byte> row(static_cast<std::size_t>(image.width));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(
      png,
      info,
      static_cast<png_uint_32>(image.width),
      static_cast<png_uint_32>(image.height),
      8,
      PNG_COLOR_TYPE_GRAY,
      PNG_INTERLACE_NONE,
      PNG_COMPRESSION_TYPE_DEFAULT,
      PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const float v = std::clamp(image.at(x, y), 0.0f, 1.0f);
      row[static_cast<std::size_t>(x)] = static_cast<png_byte>(std::lround(v * 255.0f));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_fragments(const FragmentBuffer& fragments, const std::filesystem::path& path) {
  ByteWriter w;
  w.magic("FRAG");
  w.u32(static_cast<std::uint32_t>(fragments.width));
  w.u32(static_cast<std::uint32_t>(fragments.height));
  for (const Fragment& f : fragments.pixels) {
    w.i32(f.face_id);
    w.f32(f.bary[0]);
    w.f32(f.bary[1]);
    w.f32(f.bary[2]);
    w.f32(f.depth);
  }
  w.save(path);
}

FragmentBuffer read_fragments(const std::filesystem::path& path) {
  ByteReader r(read_file_bytes(path), path.string());
  r.expect_magic("FRAG");
  const std::uint32_t width = r.u32();
  const std::uint32_t height = r.u32();
  const std::uint64_t count = static_cast<std::uint64_t>(width) * height;
  if (r.remaining() != count * 20) {
    throw FormatError(path.string() + ": fragment payload size does not match header");
  }
  FragmentBuffer out(static_cast<int>(width), static_cast<int>(height), Fragment{});
  for (Fragment& f : out.pixels) {
    f.face_id = r.i32();
    f.bary = {r.f32(), r.f32(), r.f32()};
    f.depth = r.f32();
  }
  return out;
}

} // namespace symplane
