#pragma once

// Image-sequence ingestion and mode rendering.
//
// Frames are 8-bit (or 16-bit) grayscale images. A frame of height H and width
// W becomes slice k of an H x W x K tensor with T(y, x, k) = pixel(y, x) / maxval,
// so slices flattened column-major give the snapshot columns.
//
// Supported inputs: binary PGM ("P5") and PNG (gray, gray+alpha, RGB, RGBA).
// RGB is reduced to gray with luma weights 0.299, 0.587, 0.114.
//
// HODT tensor file, all integers and floats little-endian:
//   bytes 0..7   magic "HODT" 0 0 0 1
//   3 x uint64   I1, I2, K
//   1 x float64  dt (seconds)
//   I1*I2*K x float64 entries, i1 fastest, then i2, then k

#include "hodmd/errors.hpp"
#include "hodmd/linalg.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hodmd {

struct CropRect {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t width = 0;
    std::size_t height = 0;
};

struct FrameSequenceMeta {
    std::size_t rows = 0;    // I1 (image height)
    std::size_t cols = 0;    // I2 (image width)
    std::size_t num_frames = 0;  // K after stride
    double dt = 0.0;             // stride * source dt
    std::size_t stride = 1;
    std::vector<std::string> sources;  // files actually used, in order
};

/// Grayscale image in [0, 1], row-major (y, x).
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    double at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
};

// ---------------------------------------------------------------------------
// PGM

namespace detail {

inline std::string read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(const std::string& bytes, std::size_t& pos)
{
    while (pos < bytes.size()) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
}

inline std::size_t parse_header_number(const std::string& tok, const std::string& file)
{
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw InputError("malformed PGM header in " + file);
    }
    return std::stoul(tok);
}

} // namespace detail

inline GrayImage read_pgm(const std::filesystem::path& path)
{
    const std::string bytes = detail::read_file_bytes(path);
    const std::string name = path.string();
    std::size_t pos = 0;
    if (detail::pnm_token(bytes, pos) != "P5") {
        throw InputError("not a binary PGM (P5) file: " + name);
    }
    GrayImage img;
    img.width = detail::parse_header_number(detail::pnm_token(bytes, pos), name);
    img.height = detail::parse_header_number(detail::pnm_token(bytes, pos), name);
    const std::size_t maxval = detail::parse_header_number(detail::pnm_token(bytes, pos), name);
    if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 65535) {
        throw InputError("unsupported PGM header in " + name);
    }
    ++pos;  // single whitespace byte after maxval
    const std::size_t bpp = maxval < 256 ? 1 : 2;
    const std::size_t n = img.width * img.height;
    if (bytes.size() < pos + n * bpp) {
        throw InputError("truncated PGM data in " + name);
    }
    img.pixels.resize(n);
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned v = bpp == 1 ? raw[i] : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
        img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return img;
}

/// Writes "P5\n<w> <h>\n255\n" followed by w*h bytes, row-major.
inline void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
                      const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() != width * height) {
        throw InputError("write_pgm: byte count does not match dimensions");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

// ---------------------------------------------------------------------------
// PNG

inline GrayImage read_png(const std::filesystem::path& path)
{
    const std::string name = path.string();
    const std::string bytes = detail::read_file_bytes(path);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()) == 0) {
        throw InputError("cannot decode PNG " + name + ": " + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr) == 0) {
        png_image_free(&image);
        throw InputError("cannot decode PNG " + name + ": " + image.message);
    }
    GrayImage img;
    img.width = image.width;
    img.height = image.height;
    img.pixels.resize(img.width * img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (color) {
            const double r = buffer[3 * i];
            const double g = buffer[3 * i + 1];
            const double b = buffer[3 * i + 2];
            img.pixels[i] = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
        } else {
            img.pixels[i] = buffer[i] / 255.0;
        }
    }
    return img;
}

/// 8-bit PNG writer; `channels` is 1 (gray) or 3 (RGB), rows top to bottom.
inline void write_png(const std::filesystem::path& path, std::size_t width, std::size_t height, int channels,
                      const std::vector<std::uint8_t>& bytes)
{
    if (channels != 1 && channels != 3) {
        throw InputError("write_png: channels must be 1 or 3");
    }
    if (bytes.size() != width * height * static_cast<std::size_t>(channels)) {
        throw InputError("write_png: byte count does not match dimensions");
    }
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr) == 0) {
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

inline GrayImage read_frame(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    try {
        if (ext == ".png") {
            return read_png(path);
        }
        return read_pgm(path);
    } catch (const InputError& e) {
        throw InputError(std::string("undecodable frame ") + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Sequences

namespace detail {

// '*' matches any run, '?' one character.
inline bool wildcard_match(const std::string& pattern, const std::string& text)
{
    std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

// Natural order on file names: digit runs compare by value, so frame_2 sorts
// before frame_10.
inline bool natural_less(const std::string& a, const std::string& b)
{
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
        const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
        if (da && db) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
            while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
            std::size_t is = i, js = j;
            while (is + 1 < ie && a[is] == '0') ++is;
            while (js + 1 < je && b[js] == '0') ++js;
            if (ie - is != je - js) return ie - is < je - js;
            const int c = a.compare(is, ie - is, b, js, je - js);
            if (c != 0) return c < 0;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
    return a < b;
}

inline bool is_frame_file(const std::filesystem::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".png";
}

} // namespace detail

/// Expands a frame source into a file list in natural name order: a directory (every .pgm and
/// .png inside), a wildcard in the file-name part ("dir/frame_*.pgm"), or a
/// single file.
inline std::vector<std::filesystem::path> expand_frame_pattern(const std::string& pattern)
{
    namespace fs = std::filesystem;
    std::vector<fs::path> out;
    const fs::path p(pattern);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
        for (const auto& entry : fs::directory_iterator(p)) {
            if (entry.is_regular_file() && detail::is_frame_file(entry.path())) {
                out.push_back(entry.path());
            }
        }
    } else if (pattern.find_first_of("*?") != std::string::npos) {
        const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
        const std::string name_pattern = p.filename().string();
        if (!fs::is_directory(dir, ec)) {
            throw IoError("frame directory does not exist: " + dir.string());
        }
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && detail::wildcard_match(name_pattern, entry.path().filename().string())) {
                out.push_back(entry.path());
            }
        }
    } else {
        out.push_back(p);
    }
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
        return detail::natural_less(a.string(), b.string());
    });
    return out;
}

inline void validate_crop(const CropRect& crop, std::size_t rows, std::size_t cols)
{
    if (crop.width == 0 || crop.height == 0 || crop.x0 + crop.width > cols || crop.y0 + crop.height > rows) {
        throw InputError("crop rectangle does not fit inside the " + std::to_string(cols) + "x" +
                         std::to_string(rows) + " frame");
    }
}

/// Decodes, crops and stacks every stride-th frame of `files`.
inline std::pair<Order3Tensor, FrameSequenceMeta> load_sequence(const std::vector<std::filesystem::path>& files,
                                                                const std::optional<CropRect>& crop,
                                                                std::size_t stride, double dt)
{
    if (stride < 1) {
        throw InputError("stride must be >= 1");
    }
    if (!(dt > 0.0)) {
        throw InputError("dt must be positive");
    }
    if (files.size() < 2) {
        throw InputError("need at least two frames, got " + std::to_string(files.size()));
    }
    std::vector<std::filesystem::path> used;
    for (std::size_t i = 0; i < files.size(); i += stride) {
        used.push_back(files[i]);
    }
    if (used.size() < 2) {
        throw InputError("fewer than two frames remain after stride " + std::to_string(stride));
    }

    std::vector<GrayImage> frames;
    frames.reserve(used.size());
    for (const auto& f : used) {
        if (!std::filesystem::exists(f)) {
            throw IoError("frame file does not exist: " + f.string());
        }
        frames.push_back(read_frame(f));
    }
    const std::size_t h = frames.front().height;
    const std::size_t w = frames.front().width;
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].height != h || frames[i].width != w) {
            throw InputError("mixed frame dimensions: " + used[i].string() + " is " +
                             std::to_string(frames[i].width) + "x" + std::to_string(frames[i].height) +
                             ", expected " + std::to_string(w) + "x" + std::to_string(h));
        }
    }
    const CropRect rect = crop.value_or(CropRect{0, 0, w, h});
    validate_crop(rect, h, w);

    Order3Tensor t({rect.height, rect.width, frames.size()});
    for (std::size_t k = 0; k < frames.size(); ++k)
        for (std::size_t x = 0; x < rect.width; ++x)
            for (std::size_t y = 0; y < rect.height; ++y)
                t(y, x, k) = frames[k].at(rect.y0 + y, rect.x0 + x);

    FrameSequenceMeta meta;
    meta.rows = rect.height;
    meta.cols = rect.width;
    meta.num_frames = frames.size();
    meta.dt = dt * static_cast<double>(stride);
    meta.stride = stride;
    for (const auto& f : used) meta.sources.push_back(f.string());
    return {std::move(t), std::move(meta)};
}

inline std::pair<Order3Tensor, FrameSequenceMeta> load_sequence(const std::string& pattern,
                                                                const std::optional<CropRect>& crop,
                                                                std::size_t stride, double dt)
{
    return load_sequence(expand_frame_pattern(pattern), crop, stride, dt);
}

/// Same crop/stride semantics applied to an in-memory tensor (rows = i1 = y).
inline Order3Tensor crop_and_stride(const Order3Tensor& t, const std::optional<CropRect>& crop, std::size_t stride)
{
    if (stride < 1) {
        throw InputError("stride must be >= 1");
    }
    const auto [rows, cols, k] = t.dims();
    const CropRect rect = crop.value_or(CropRect{0, 0, cols, rows});
    validate_crop(rect, rows, cols);
    const std::size_t kept = (k + stride - 1) / stride;
    if (kept < 2) {
        throw InputError("fewer than two frames remain after stride " + std::to_string(stride));
    }
    Order3Tensor out({rect.height, rect.width, kept});
    for (std::size_t f = 0; f < kept; ++f)
        for (std::size_t x = 0; x < rect.width; ++x)
            for (std::size_t y = 0; y < rect.height; ++y)
                out(y, x, f) = t(rect.y0 + y, rect.x0 + x, f * stride);
    return out;
}

// ---------------------------------------------------------------------------
// Matrix <-> tensor

/// Column k = slice k flattened column-major (i1 fastest).
inline RealMatrix tensor_to_matrix(const Order3Tensor& t)
{
    return t.as_matrix();
}

inline Order3Tensor matrix_to_tensor(const RealMatrix& m, std::size_t rows, std::size_t cols)
{
    if (static_cast<std::size_t>(m.rows()) != rows * cols) {
        throw InputError("matrix_to_tensor: row count does not equal rows * cols");
    }
    Order3Tensor t({rows, cols, static_cast<std::size_t>(m.cols())});
    t.as_matrix() = m;
    return t;
}

// ---------------------------------------------------------------------------
// HODT

inline constexpr std::array<char, 8> kHodtMagic{'H', 'O', 'D', 'T', '\0', '\0', '\0', '\1'};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint64_t get_u64(const std::string& in, std::size_t pos)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
    }
    return v;
}

} // namespace detail

inline void write_hodt(const std::filesystem::path& path, const Order3Tensor& t, double dt)
{
    std::string buf(kHodtMagic.begin(), kHodtMagic.end());
    for (std::size_t d : t.dims()) detail::put_u64(buf, d);
    detail::put_u64(buf, std::bit_cast<std::uint64_t>(dt));
    buf.reserve(buf.size() + 8 * t.size());
    for (double v : t.data()) detail::put_u64(buf, std::bit_cast<std::uint64_t>(v));
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

struct HodtFile {
    Order3Tensor tensor;
    double dt = 0.0;
};

inline HodtFile read_hodt(const std::filesystem::path& path)
{
    const std::string bytes = detail::read_file_bytes(path);
    const std::string name = path.string();
    constexpr std::size_t header = 8 + 3 * 8 + 8;
    if (bytes.size() < header || !std::equal(kHodtMagic.begin(), kHodtMagic.end(), bytes.begin())) {
        throw InputError("not a HODT file: " + name);
    }
    const Order3Tensor::Dims dims{detail::get_u64(bytes, 8), detail::get_u64(bytes, 16), detail::get_u64(bytes, 24)};
    const double dt = std::bit_cast<double>(detail::get_u64(bytes, 32));
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) {
        throw InputError("HODT file has a zero dimension: " + name);
    }
    const std::size_t count = dims[0] * dims[1] * dims[2];
    if (count / dims[0] / dims[1] != dims[2] || bytes.size() != header + 8 * count) {
        throw InputError("HODT payload size does not match its dims: " + name);
    }
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<double>(detail::get_u64(bytes, header + 8 * i));
    }
    return {Order3Tensor(dims, std::move(data)), dt};
}

// ---------------------------------------------------------------------------
// Rendering and units

/// 8-bit grayscale mapping of the real part of a mode: -max|Re| -> 0, 0 -> 128,
/// +max|Re| -> 255, via round-half-up of 255 * (x / maxabs + 1) / 2. An all-zero
/// real part renders uniform 128. Bytes are row-major (y, x) for an image of
/// `rows` x `cols` whose flattening is column-major.
inline std::vector<std::uint8_t> render_mode_bytes(const ComplexVector& mode, std::size_t rows, std::size_t cols)
{
    if (static_cast<std::size_t>(mode.size()) != rows * cols) {
        throw InputError("render_mode: mode length does not equal rows * cols");
    }
    const RealVector re = mode.real();
    const double maxabs = re.size() > 0 ? re.cwiseAbs().maxCoeff() : 0.0;
    std::vector<std::uint8_t> bytes(rows * cols);
    for (std::size_t y = 0; y < rows; ++y) {
        for (std::size_t x = 0; x < cols; ++x) {
            const double v = maxabs > 0.0 ? re(static_cast<Eigen::Index>(y + rows * x)) / maxabs : 0.0;
            const double level = std::floor(255.0 * (v + 1.0) / 2.0 + 0.5);
            bytes[y * cols + x] = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
        }
    }
    return bytes;
}

inline void render_mode(const ComplexVector& mode, std::size_t rows, std::size_t cols,
                        const std::filesystem::path& path)
{
    write_pgm(path, cols, rows, render_mode_bytes(mode, rows, cols));
}

/// Angular frequency (rad/s) to events per minute: |omega| * 60 / (2 pi).
/// Evaluated as 30 / (pi / |omega|) so the Nyquist value pi/dt maps back
/// through the same division; for dt = 4 ms this gives exactly 7500.
inline double to_bpm(double omega)
{
    return 30.0 / (std::numbers::pi / std::abs(omega));
}

} // namespace hodmd
