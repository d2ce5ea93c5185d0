#include "obscura/io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "obscura/error.hpp"

namespace obscura::io {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
  char message[256] = {};
  std::jmp_buf jump;
};

struct PngWriteState {
  std::vector<std::uint8_t>* out = nullptr;
  char message[256] = {};
  std::jmp_buf jump;
};

template <typename State>
void png_error_handler(png_structp png, png_const_charp msg) {
  auto* state = static_cast<State*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  std::longjmp(state->jump, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

void png_read_callback(png_structp png, png_bytep dest, png_size_t length) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->offset + length > state->bytes.size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(dest, state->bytes.data() + state->offset, length);
  state->offset += length;
}

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* state = static_cast<PngWriteState*>(png_get_io_ptr(png));
  state->out->insert(state->out->end(), data, data + length);
}

void png_flush_callback(png_structp) {}

struct DecodedPng {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  int bit_depth = 8;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
};

// Plain-C style on purpose: no objects with destructors live across setjmp.
bool decode_png_raw(PngReadState& state, DecodedPng& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler<PngReadState>,
                                           png_warning_handler);
  if (png == nullptr) {
    std::snprintf(state.message, sizeof(state.message), "cannot allocate PNG reader");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (setjmp(state.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &state, png_read_callback);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const int colour = png_get_color_type(png, info);
  out.channels = (colour == PNG_COLOR_TYPE_GRAY) ? 1 : 3;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.pixels.resize(rowbytes * out.height);
  out.rows.resize(out.height);
  for (std::size_t r = 0; r < out.height; ++r) out.rows[r] = out.pixels.data() + r * rowbytes;
  png_read_image(png, out.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

PlanarImage decode_png(std::span<const std::uint8_t> bytes, int* bit_depth = nullptr) {
  PngReadState state;
  state.bytes = bytes;
  DecodedPng raw;
  if (!decode_png_raw(state, raw)) {
    throw ParseError(std::string("PNG decode failed: ") + state.message, state.offset);
  }
  if (bit_depth != nullptr) *bit_depth = raw.bit_depth;
  if (raw.bit_depth != 8 && raw.bit_depth != 16) {
    throw ParseError("unsupported PNG bit depth " + std::to_string(raw.bit_depth), state.offset);
  }
  PlanarImage image(raw.channels, raw.height, raw.width);
  const double scale = raw.bit_depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  const std::size_t bytes_per = raw.bit_depth / 8;
  for (std::size_t r = 0; r < raw.height; ++r) {
    for (std::size_t c = 0; c < raw.width; ++c) {
      for (std::size_t ch = 0; ch < raw.channels; ++ch) {
        const std::size_t i = ((r * raw.width + c) * raw.channels + ch) * bytes_per;
        const unsigned v = bytes_per == 2 ? (unsigned(raw.pixels[i]) << 8) | raw.pixels[i + 1] : raw.pixels[i];
        image.at(ch, r, c) = v * scale;
      }
    }
  }
  return image;
}

// PFM header token reader that reports offsets.
class PfmCursor {
 public:
  explicit PfmCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) ++pos_;
    if (start == pos_) throw ParseError("PFM header truncated", pos_);
    return std::string(bytes_.begin() + start, bytes_.begin() + pos_);
  }

  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw ParseError("PFM header not terminated", pos_);
    ++pos_;
  }

  std::size_t offset() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

PlanarImage decode_pfm(std::span<const std::uint8_t> bytes) {
  PfmCursor cur(bytes);
  const std::string magic = cur.token();
  std::size_t channels = 0;
  if (magic == "PF") channels = 3;
  else if (magic == "Pf") channels = 1;
  else throw ParseError("not a PFM file", 0);
  std::size_t width = 0, height = 0;
  double scale = 0.0;
  try {
    const std::size_t at = cur.offset();
    const std::string ws = cur.token();
    const std::string hs = cur.token();
    const std::string ss = cur.token();
    std::size_t used = 0;
    width = std::stoul(ws, &used);
    if (used != ws.size()) throw ParseError("bad PFM width", at);
    height = std::stoul(hs, &used);
    if (used != hs.size()) throw ParseError("bad PFM height", at);
    scale = std::stod(ss, &used);
    if (used != ss.size() || scale == 0.0) throw ParseError("bad PFM scale", at);
  } catch (const std::logic_error&) {
    throw ParseError("malformed PFM header", cur.offset());
  }
  cur.single_whitespace();
  const std::size_t data_start = cur.offset();
  if (width == 0 || height == 0) throw ParseError("PFM has zero size", data_start);
  if (width > bytes.size() / height) throw ParseError("PFM dimensions exceed file size", data_start);
  const std::size_t needed = width * height * channels * 4;
  if (bytes.size() - data_start < needed) {
    throw ParseError("PFM pixel data truncated: need " + std::to_string(needed) + " bytes", bytes.size());
  }
  const bool little = scale < 0.0;
  PlanarImage image(channels, height, width);
  const std::uint8_t* p = bytes.data() + data_start;
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t r = height - 1 - row;  // PFM stores bottom row first
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, p, 4);
        p += 4;
        if ((std::endian::native == std::endian::little) != little) bits = __builtin_bswap32(bits);
        image.at(ch, r, c) = static_cast<double>(std::bit_cast<float>(bits));
      }
    }
  }
  return image;
}

std::map<std::string, std::string> read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(sidecar_path(path));
  if (!in) throw InvalidInput("missing sidecar file " + sidecar_path(path).string());
  std::map<std::string, std::string> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return values;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidInput("write failed for " + path.string());
}

PlanarImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == 'F' || bytes[1] == 'f')) return decode_pfm(bytes);
  throw ParseError("unrecognized image signature (expected PNG or PFM)", 0);
}

PlanarImage read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.offset());
  }
}

namespace {

struct PngLayout {
  png_uint_32 width;
  png_uint_32 height;
  int bit_depth;
  int colour_type;
  std::size_t stride;
};

bool encode_png_raw(PngWriteState& state, const PngLayout& layout, std::vector<std::uint8_t>& pixels) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler<PngWriteState>,
                                            png_warning_handler);
  if (png == nullptr) {
    std::snprintf(state.message, sizeof(state.message), "cannot allocate PNG writer");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(layout.height);
  for (std::size_t r = 0; r < layout.height; ++r) rows[r] = pixels.data() + r * layout.stride;
  if (setjmp(state.jump)) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &state, png_write_callback, png_flush_callback);
  png_set_IHDR(png, info, layout.width, layout.height, layout.bit_depth, layout.colour_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const PlanarImage& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("PNG bit depth must be 8 or 16");
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const std::size_t ch = image.channels();
  const std::size_t bytes_per = static_cast<std::size_t>(bit_depth) / 8;
  const double maxcode = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<std::uint8_t> pixels(h * w * ch * bytes_per);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t k = 0; k < ch; ++k) {
        const double v = std::clamp(image.at(k, r, c), 0.0, 1.0);
        const auto code = static_cast<unsigned>(std::lround(v * maxcode));
        const std::size_t i = ((r * w + c) * ch + k) * bytes_per;
        if (bytes_per == 2) {
          pixels[i] = static_cast<std::uint8_t>(code >> 8);
          pixels[i + 1] = static_cast<std::uint8_t>(code & 0xFF);
        } else {
          pixels[i] = static_cast<std::uint8_t>(code);
        }
      }
    }
  }

  std::vector<std::uint8_t> out;
  PngWriteState state;
  state.out = &out;
  const PngLayout layout{static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
                         ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, w * ch * bytes_per};
  if (!encode_png_raw(state, layout, pixels)) throw Error(std::string("PNG encode failed: ") + state.message);
  return out;
}

std::vector<std::uint8_t> encode_pfm(const PlanarImage& image) {
  const std::string header = std::string(image.channels() == 3 ? "PF" : "Pf") + "\n" +
                             std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n-1.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.sample_count() * 4);
  for (std::size_t row = 0; row < image.height(); ++row) {
    const std::size_t r = image.height() - 1 - row;
    for (std::size_t c = 0; c < image.width(); ++c) {
      for (std::size_t k = 0; k < image.channels(); ++k) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(image.at(k, r, c)));
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
      }
    }
  }
  return out;
}

void write_image(const std::filesystem::path& path, const PlanarImage& image, int bit_depth) {
  if (image.sample_count() == 0) throw InvalidArgument("cannot write an empty image");
  if (path.extension() == ".pfm" || path.extension() == ".PFM") {
    write_file(path, encode_pfm(image));
  } else {
    write_file(path, encode_png(image, bit_depth));
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".txt");
}

void write_psf(const std::filesystem::path& path, const Psf& psf) {
  write_file(path, encode_pfm(PlanarImage(std::vector<Plane>{psf.kernel()})));
  write_text(sidecar_path(path), "pitch_m=" + format_double(psf.pitch()) + "\n");
}

Psf read_psf(const std::filesystem::path& path) {
  const PlanarImage image = read_image(path);
  if (image.channels() != 1) throw InvalidInput("PSF file must be single-channel: " + path.string());
  const auto meta = read_sidecar(path);
  const auto it = meta.find("pitch_m");
  if (it == meta.end()) throw InvalidInput("PSF sidecar lacks pitch_m: " + sidecar_path(path).string());
  double pitch = 0.0;
  try {
    pitch = std::stod(it->second);
  } catch (const std::logic_error&) {
    throw InvalidInput("PSF sidecar has an invalid pitch_m value");
  }
  // float32 storage perturbs the sum slightly, so renormalize.
  return normalize_psf(image.channel(0), pitch);
}

void write_mtf_csv(const std::filesystem::path& path, const MtfCurve& curve) {
  std::ostringstream os;
  os << "freq_cyc_per_mm,modulation\n" << std::setprecision(10);
  for (const auto& s : curve.samples()) os << s.frequency << ',' << s.modulation << '\n';
  write_text(path, os.str());
}

BayerImage read_bayer(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  int bit_depth = 16;
  PlanarImage mono;
  try {
    mono = decode_png(bytes, &bit_depth);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.offset());
  }
  if (mono.channels() != 1) throw InvalidInput("Bayer PNG must be grayscale: " + path.string());
  const auto meta = read_sidecar(path);
  BayerImage out;
  out.data = mono.channel(0);
  const auto pattern = meta.find("pattern");
  if (pattern == meta.end()) throw InvalidInput("Bayer sidecar lacks pattern=");
  out.pattern = parse_bayer_pattern(pattern->second);
  const auto black = meta.find("black_level");
  if (black != meta.end()) {
    const double maxcode = bit_depth == 16 ? 65535.0 : 255.0;
    try {
      out.black_level = std::stod(black->second) / maxcode;
    } catch (const std::logic_error&) {
      throw InvalidInput("Bayer sidecar has an invalid black_level value");
    }
  }
  out.validate();
  return out;
}

void write_bayer(const std::filesystem::path& path, const BayerImage& raw) {
  raw.validate();
  write_file(path, encode_png(PlanarImage(std::vector<Plane>{raw.data}), 16));
  write_text(sidecar_path(path), "pattern=" + std::string(to_string(raw.pattern)) +
                                     "\nblack_level=" + format_double(raw.black_level * 65535.0) + "\n");
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace obscura::io
