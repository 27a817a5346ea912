#include "dr/image_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <jpeglib.h>

namespace dr::io {

namespace {

const uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad())
    throw Error(ErrorKind::IoError, "read failed for " + path.string());
  return bytes;
}

ImageBuffer decode_png_impl(std::span<const uint8_t> bytes, bool want_alpha,
                            Mask* alpha_out) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw Error(ErrorKind::CodecError,
                std::string("png decode: ") + image.message);

  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0 && !want_alpha;
  image.format = want_alpha ? PNG_FORMAT_RGBA
                            : (gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB);
  const int channels = want_alpha ? 4 : (gray ? 1 : 3);
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  std::vector<uint8_t> raw(size_t(w) * h * channels);
  const png_color background = {0, 0, 0};
  if (!png_image_finish_read(&image, &background, raw.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorKind::CodecError,
                std::string("png decode: ") + image.message);
  }

  if (!want_alpha) return ImageBuffer::from_u8(w, h, channels, std::move(raw));

  std::vector<uint8_t> rgb(size_t(w) * h * 3);
  std::vector<float> alpha(size_t(w) * h);
  for (size_t i = 0; i < size_t(w) * h; ++i) {
    rgb[i * 3 + 0] = raw[i * 4 + 0];
    rgb[i * 3 + 1] = raw[i * 4 + 1];
    rgb[i * 3 + 2] = raw[i * 4 + 2];
    alpha[i] = static_cast<float>(raw[i * 4 + 3]) / 255.0f;
  }
  if (alpha_out)
    *alpha_out = Mask::from_values(w, h, MaskKind::Generic, std::move(alpha));
  return ImageBuffer::from_u8(w, h, 3, std::move(rgb));
}

std::vector<uint8_t> encode_png_impl(const uint8_t* data, int w, int h,
                                     int channels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = channels == 1   ? PNG_FORMAT_GRAY
                 : channels == 3 ? PNG_FORMAT_RGB
                                 : PNG_FORMAT_RGBA;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, data, 0, nullptr))
    throw Error(ErrorKind::CodecError,
                std::string("png encode: ") + image.message);
  std::vector<uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, data, 0,
                                 nullptr))
    throw Error(ErrorKind::CodecError,
                std::string("png encode: ") + image.message);
  out.resize(size);
  return out;
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  longjmp(mgr->jump, 1);
}

}  // namespace

bool looks_like_png(std::span<const uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0;
}

bool looks_like_jpeg(std::span<const uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 &&
         bytes[2] == 0xFF;
}

ImageBuffer load_image(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  if (looks_like_png(bytes)) return decode_png(bytes);
  if (looks_like_jpeg(bytes)) return decode_jpeg(bytes);
  throw Error(ErrorKind::UnsupportedFormat,
              "not a PNG or JPEG file: " + path.string());
}

void save_png(const ImageBuffer& img, const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::vector<uint8_t> encode_png(const ImageBuffer& img) {
  const ImageBuffer u8 = img.to_u8();
  return encode_png_impl(u8.u8().data(), u8.width(), u8.height(),
                         u8.channels());
}

ImageBuffer decode_png(std::span<const uint8_t> bytes) {
  return decode_png_impl(bytes, false, nullptr);
}

std::vector<uint8_t> encode_png_rgba(const ImageBuffer& rgb,
                                     const Mask& alpha) {
  const ImageBuffer u8 = rgb.to_u8();
  if (u8.channels() != 3)
    throw Error(ErrorKind::InvalidParam, "RGBA payload needs a 3-channel image");
  if (!alpha.matches(u8))
    throw Error(ErrorKind::DimensionMismatch, "alpha mask shape mismatch");
  const size_t n = u8.pixel_count();
  std::vector<uint8_t> raw(n * 4);
  const auto src = u8.u8();
  const auto a = alpha.values();
  for (size_t i = 0; i < n; ++i) {
    raw[i * 4 + 0] = src[i * 3 + 0];
    raw[i * 4 + 1] = src[i * 3 + 1];
    raw[i * 4 + 2] = src[i * 3 + 2];
    const float v = a[i] * 255.0f;
    raw[i * 4 + 3] =
        static_cast<uint8_t>(v <= 0.0f ? 0 : (v >= 255.0f ? 255 : v + 0.5f));
  }
  return encode_png_impl(raw.data(), u8.width(), u8.height(), 4);
}

std::pair<ImageBuffer, Mask> decode_png_rgba(std::span<const uint8_t> bytes) {
  Mask alpha;
  ImageBuffer img = decode_png_impl(bytes, true, &alpha);
  return {std::move(img), std::move(alpha)};
}

std::vector<uint8_t> encode_jpeg(const ImageBuffer& img, int quality) {
  if (quality < 1 || quality > 100)
    throw Error(ErrorKind::InvalidParam, "jpeg quality must be in [1,100]");
  const ImageBuffer u8 = img.to_u8();

  jpeg_compress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;

  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    if (mem) free(mem);
    throw Error(ErrorKind::CodecError, std::string("jpeg encode: ") + err.message);
  }

  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &mem, &mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(u8.width());
  cinfo.image_height = static_cast<JDIMENSION>(u8.height());
  cinfo.input_components = u8.channels();
  cinfo.in_color_space = u8.channels() == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);

  const auto data = u8.u8();
  const size_t stride = size_t(u8.width()) * u8.channels();
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(data.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);

  std::vector<uint8_t> out(mem, mem + mem_size);
  free(mem);
  return out;
}

ImageBuffer decode_jpeg(std::span<const uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorKind::CodecError, std::string("jpeg decode: ") + err.message);
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), bytes.size());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space =
      cinfo.jpeg_color_space == JCS_GRAYSCALE ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  const int channels = cinfo.output_components;
  std::vector<uint8_t> raw(size_t(w) * h * channels);
  const size_t stride = size_t(w) * channels;
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = raw.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  return ImageBuffer::from_u8(w, h, channels, std::move(raw));
}

}  // namespace dr::io
