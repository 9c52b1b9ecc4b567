#include "rdic/image_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace rdic {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad())
        throw Error("read failed: " + path);
    return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("write failed: " + path);
}

namespace {

bool is_pnm_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Skips whitespace and '#' comment lines between header tokens.
void skip_header_space(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (is_pnm_space(bytes[pos])) {
            ++pos;
        } else if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n')
                ++pos;
        } else {
            break;
        }
    }
}

long parse_header_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                      const char* field, const char* format) {
    skip_header_space(bytes, pos);
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
        throw ParseError(std::string(format) + ": malformed header: expected " + field);
    long value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
        value = value * 10 + (bytes[pos] - '0');
        if (value > 1'000'000'000L)
            throw ParseError(std::string(format) + ": header value out of range in " + field);
        ++pos;
    }
    return value;
}

} // namespace

Image parse_pnm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw ParseError("pnm: bad magic, expected P5 or P6");
    const int channels = bytes[1] == '5' ? 1 : 3;

    std::size_t pos = 2;
    const long width = parse_header_int(bytes, pos, "width", "pnm");
    const long height = parse_header_int(bytes, pos, "height", "pnm");
    const long maxval = parse_header_int(bytes, pos, "maxval", "pnm");
    if (maxval != 255)
        throw ParseError("pnm: unsupported maxval " + std::to_string(maxval) +
                         " (only 255 is supported)");
    if (width < 1 || height < 1)
        throw ParseError("pnm: non-positive dimensions");
    if (pos >= bytes.size() || !is_pnm_space(bytes[pos]))
        throw ParseError("pnm: malformed header: missing separator before samples");
    ++pos; // single whitespace byte between header and payload

    Image img(static_cast<int>(width), static_cast<int>(height), channels);
    const std::size_t need = img.sample_count();
    if (bytes.size() - pos < need)
        throw ParseError("pnm: truncated payload: expected " + std::to_string(need) +
                         " bytes, got " + std::to_string(bytes.size() - pos));
    std::memcpy(img.data.data(), bytes.data() + pos, need);
    return img;
}

Image read_pnm(const std::string& path) {
    return parse_pnm(read_file(path));
}

std::vector<std::uint8_t> pnm_bytes(const Image& img) {
    if (img.data.size() != img.sample_count())
        throw Error("pnm: image data length does not match dimensions");
    std::string header = (img.channels == 1 ? "P5\n" : "P6\n");
    header += std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), img.data.begin(), img.data.end());
    return bytes;
}

void write_pnm(const Image& img, const std::string& path) {
    write_file(path, pnm_bytes(img));
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "pfm io assumes a little-endian host");

float parse_header_float(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    skip_header_space(bytes, pos);
    std::size_t start = pos;
    while (pos < bytes.size() && !is_pnm_space(bytes[pos]))
        ++pos;
    if (start == pos)
        throw ParseError("pfm: malformed header: expected scale");
    const std::string token(bytes.begin() + start, bytes.begin() + pos);
    try {
        std::size_t consumed = 0;
        const float v = std::stof(token, &consumed);
        if (consumed != token.size())
            throw ParseError("pfm: malformed scale '" + token + "'");
        return v;
    } catch (const std::exception&) {
        throw ParseError("pfm: malformed scale '" + token + "'");
    }
}

} // namespace

FloatPlane parse_pfm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != 'f' && bytes[1] != 'F'))
        throw ParseError("pfm: bad magic, expected Pf");
    if (bytes[1] == 'F')
        throw ParseError("pfm: color PFM is unsupported, expected grayscale Pf");

    std::size_t pos = 2;
    const long width = parse_header_int(bytes, pos, "width", "pfm");
    const long height = parse_header_int(bytes, pos, "height", "pfm");
    const float scale = parse_header_float(bytes, pos);
    if (!(scale < 0.0f))
        throw ParseError("pfm: big-endian PFM is unsupported (scale must be negative)");
    if (pos >= bytes.size() || !is_pnm_space(bytes[pos]))
        throw ParseError("pfm: malformed header: missing separator before samples");
    ++pos;

    FloatPlane plane(static_cast<int>(width), static_cast<int>(height));
    const std::size_t need = plane.size() * sizeof(float);
    if (bytes.size() - pos < need)
        throw ParseError("pfm: truncated payload: expected " + std::to_string(need) +
                         " bytes, got " + std::to_string(bytes.size() - pos));

    // Scanlines are stored bottom-to-top.
    for (int y = 0; y < plane.height; ++y) {
        const int src_row = plane.height - 1 - y;
        for (int x = 0; x < plane.width; ++x) {
            float v;
            std::memcpy(&v, bytes.data() + pos +
                                (static_cast<std::size_t>(src_row) * plane.width + x) *
                                    sizeof(float),
                        sizeof(float));
            if (!std::isfinite(v))
                throw ParseError("pfm: non-finite sample at (" + std::to_string(x) + "," +
                                 std::to_string(y) + ")");
            plane.at(x, y) = v;
        }
    }
    return plane;
}

FloatPlane read_pfm(const std::string& path) {
    return parse_pfm(read_file(path));
}

std::vector<std::uint8_t> pfm_bytes(const FloatPlane& plane) {
    plane.require_finite("pfm");
    std::string header = "Pf\n" + std::to_string(plane.width) + " " +
                         std::to_string(plane.height) + "\n-1.0\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.resize(bytes.size() + plane.size() * sizeof(float));
    std::uint8_t* out = bytes.data() + header.size();
    for (int y = 0; y < plane.height; ++y) {
        const int src_row = plane.height - 1 - y; // bottom-to-top
        for (int x = 0; x < plane.width; ++x) {
            const float v = static_cast<float>(plane.at(x, src_row));
            std::memcpy(out, &v, sizeof(float));
            out += sizeof(float);
        }
    }
    return bytes;
}

void write_pfm(const FloatPlane& plane, const std::string& path) {
    write_file(path, pfm_bytes(plane));
}

} // namespace rdic
