#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "jpeg_common.hpp"
#include "rdic/image.hpp"

namespace rdic {

namespace {

using namespace jpegdetail;

[[noreturn]] void fail(const std::string& what, std::size_t offset) {
    throw ParseError("jpeg: " + what + " at byte " + std::to_string(offset));
}

std::string hex_byte(std::uint8_t b) {
    static const char digits[] = "0123456789ABCDEF";
    return std::string("0x") + digits[b >> 4] + digits[b & 0x0F];
}

// Canonical Huffman decoding state per Annex F: first code, last code and
// value offset per code length.
struct HuffmanDecoder {
    std::array<std::int32_t, 17> min_code{};
    std::array<std::int32_t, 17> max_code{}; // -1 where no codes of that length
    std::array<int, 17> val_ptr{};
    std::vector<std::uint8_t> values;

    void build(const std::array<std::uint8_t, 16>& bits, std::vector<std::uint8_t> vals,
               std::size_t offset) {
        values = std::move(vals);
        std::int32_t code = 0;
        int index = 0;
        for (int len = 1; len <= 16; ++len) {
            const int count = bits[len - 1];
            if (count == 0) {
                min_code[len] = 0;
                max_code[len] = -1;
            } else {
                val_ptr[len] = index;
                min_code[len] = code;
                code += count;
                index += count;
                max_code[len] = code - 1;
            }
            code <<= 1;
        }
        if (static_cast<std::size_t>(index) != values.size())
            fail("huffman table value count does not match its code lengths", offset);
    }
};

class SegmentReader {
public:
    SegmentReader(const JpegStream& stream, std::size_t begin, std::size_t end)
        : stream_(stream), pos_(begin), end_(end) {}

    std::uint8_t u8() {
        if (pos_ >= end_)
            fail("segment shorter than declared", pos_);
        return stream_[pos_++];
    }

    std::uint16_t u16() {
        const std::uint16_t hi = u8();
        return static_cast<std::uint16_t>((hi << 8) | u8());
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return end_ - pos_; }

private:
    const JpegStream& stream_;
    std::size_t pos_;
    std::size_t end_;
};

// Entropy-coded bit reader with 0xFF00 unstuffing. Stops at any marker.
class BitReader {
public:
    BitReader(const JpegStream& stream, std::size_t pos) : stream_(stream), pos_(pos) {}

    int next_bit() {
        if (filled_ == 0) {
            if (pos_ >= stream_.size())
                fail("truncated entropy data", pos_);
            std::uint8_t byte = stream_[pos_];
            if (byte == 0xFF) {
                if (pos_ + 1 >= stream_.size())
                    fail("truncated entropy data", pos_);
                const std::uint8_t next = stream_[pos_ + 1];
                if (next == 0x00) {
                    pos_ += 2; // stuffed data byte
                } else if (next >= 0xD0 && next <= 0xD7) {
                    fail("unexpected restart marker (restart intervals unsupported)", pos_);
                } else {
                    fail("entropy data ended early at marker", pos_);
                }
            } else {
                ++pos_;
            }
            buffer_ = byte;
            filled_ = 8;
        }
        --filled_;
        return (buffer_ >> filled_) & 1;
    }

    int receive(int count) {
        int v = 0;
        for (int i = 0; i < count; ++i)
            v = (v << 1) | next_bit();
        return v;
    }

    int decode_symbol(const HuffmanDecoder& huff) {
        std::int32_t code = next_bit();
        for (int len = 1; len <= 16; ++len) {
            if (huff.max_code[len] >= 0 && code <= huff.max_code[len])
                return huff.values[huff.val_ptr[len] + (code - huff.min_code[len])];
            code = (code << 1) | next_bit();
        }
        fail("huffman decode failure (no code matched)", pos_);
    }

    std::size_t pos() const { return pos_; }

private:
    const JpegStream& stream_;
    std::size_t pos_;
    std::uint8_t buffer_ = 0;
    int filled_ = 0;
};

int extend(int value, int category) {
    return value < (1 << (category - 1)) ? value - (1 << category) + 1 : value;
}

struct ComponentInfo {
    int id = 0;
    int quant_id = 0;
    int dc_id = 0;
    int ac_id = 0;
};

struct DecoderState {
    int width = 0;
    int height = 0;
    std::vector<ComponentInfo> components;
    std::array<std::optional<QuantTable>, 4> quant;
    std::array<HuffmanDecoder, 4> dc_tables;
    std::array<bool, 4> dc_present{};
    std::array<HuffmanDecoder, 4> ac_tables;
    std::array<bool, 4> ac_present{};
};

bool is_sof_marker(std::uint8_t m) {
    return m >= 0xC0 && m <= 0xCF && m != kDHT && m != 0xC8 /*JPG*/ && m != 0xCC /*DAC*/;
}

void parse_dqt(SegmentReader& seg, DecoderState& state) {
    while (seg.remaining() > 0) {
        const std::size_t at = seg.pos();
        const std::uint8_t pq_tq = seg.u8();
        if ((pq_tq >> 4) != 0)
            fail("16-bit quantization tables unsupported", at);
        const int id = pq_tq & 0x0F;
        if (id > 3)
            fail("quantization table id out of range", at);
        QuantTable table;
        for (int z = 0; z < 64; ++z) {
            const int v = seg.u8();
            if (v == 0)
                fail("zero quantization divisor", at);
            table.zigzag[z] = v;
        }
        state.quant[id] = table;
    }
}

void parse_dht(SegmentReader& seg, DecoderState& state) {
    while (seg.remaining() > 0) {
        const std::size_t at = seg.pos();
        const std::uint8_t tc_th = seg.u8();
        const int table_class = tc_th >> 4;
        const int id = tc_th & 0x0F;
        if (table_class > 1 || id > 3)
            fail("huffman table class/id out of range", at);
        std::array<std::uint8_t, 16> bits{};
        std::size_t total = 0;
        for (auto& b : bits) {
            b = seg.u8();
            total += b;
        }
        if (total > 256)
            fail("huffman table with more than 256 symbols", at);
        std::vector<std::uint8_t> values(total);
        for (auto& v : values)
            v = seg.u8();
        if (table_class == 0) {
            state.dc_tables[id].build(bits, std::move(values), at);
            state.dc_present[id] = true;
        } else {
            state.ac_tables[id].build(bits, std::move(values), at);
            state.ac_present[id] = true;
        }
    }
}

void parse_sof0(SegmentReader& seg, DecoderState& state) {
    const std::size_t at = seg.pos();
    const int precision = seg.u8();
    if (precision != 8)
        fail("sample precision " + std::to_string(precision) + " unsupported (want 8)", at);
    state.height = seg.u16();
    state.width = seg.u16();
    if (state.width < 1 || state.height < 1)
        fail("frame has zero dimension", at);
    const int count = seg.u8();
    if (count != 1 && count != 3)
        fail("component count " + std::to_string(count) + " unsupported (want 1 or 3)", at);
    for (int c = 0; c < count; ++c) {
        ComponentInfo info;
        info.id = seg.u8();
        const std::uint8_t sampling = seg.u8();
        if (sampling != 0x11)
            fail("subsampled streams unsupported (sampling factors must be 1x1)", at);
        info.quant_id = seg.u8();
        if (info.quant_id > 3)
            fail("quantization table id out of range", at);
        state.components.push_back(info);
    }
}

void parse_sos(SegmentReader& seg, DecoderState& state) {
    const std::size_t at = seg.pos();
    const int count = seg.u8();
    if (count != static_cast<int>(state.components.size()))
        fail("scan component count does not match the frame", at);
    for (int c = 0; c < count; ++c) {
        const int id = seg.u8();
        ComponentInfo* info = nullptr;
        for (auto& comp : state.components)
            if (comp.id == id)
                info = &comp;
        if (!info)
            fail("scan references unknown component id " + std::to_string(id), at);
        const std::uint8_t tables = seg.u8();
        info->dc_id = tables >> 4;
        info->ac_id = tables & 0x0F;
        if (info->dc_id > 3 || info->ac_id > 3)
            fail("huffman table id out of range", at);
    }
    const int ss = seg.u8();
    const int se = seg.u8();
    const int ah_al = seg.u8();
    if (ss != 0 || se != 63 || ah_al != 0)
        fail("progressive or partial scans unsupported", at);
}

} // namespace

Image decode(const JpegStream& stream) {
    if (stream.size() < 2 || stream[0] != 0xFF || stream[1] != kSOI)
        throw ParseError("jpeg: missing SOI marker at byte 0");

    DecoderState state;
    std::size_t pos = 2;
    std::size_t scan_start = 0;

    while (scan_start == 0) {
        // Optional fill bytes before a marker.
        if (pos >= stream.size())
            fail("unexpected end of stream before SOS", pos);
        if (stream[pos] != 0xFF)
            fail("expected a marker, found " + hex_byte(stream[pos]), pos);
        while (pos < stream.size() && stream[pos] == 0xFF)
            ++pos;
        if (pos >= stream.size())
            fail("unexpected end of stream inside a marker", pos);
        const std::uint8_t marker = stream[pos++];
        if (marker == kEOI)
            fail("EOI before any scan data", pos - 2);
        if (marker == kSOI)
            fail("duplicate SOI", pos - 2);
        if (marker == 0x00)
            fail("invalid marker 0x00", pos - 2);
        if (marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7))
            fail("unexpected standalone marker " + hex_byte(marker), pos - 2);

        if (pos + 2 > stream.size())
            fail("truncated segment header", pos);
        const std::size_t length = (static_cast<std::size_t>(stream[pos]) << 8) | stream[pos + 1];
        if (length < 2 || pos + length > stream.size())
            fail("segment length overruns the stream", pos);
        SegmentReader seg(stream, pos + 2, pos + length);

        if (marker == kDQT) {
            parse_dqt(seg, state);
        } else if (marker == kDHT) {
            parse_dht(seg, state);
        } else if (marker == kSOF0) {
            if (!state.components.empty())
                fail("duplicate SOF segment", pos);
            parse_sof0(seg, state);
        } else if (is_sof_marker(marker)) {
            fail("unsupported SOF type " + hex_byte(marker) +
                     " (only baseline sequential is supported)",
                 pos - 2);
        } else if (marker == kDRI) {
            if (seg.u16() != 0)
                fail("restart intervals unsupported", pos);
        } else if (marker == kSOS) {
            if (state.components.empty())
                fail("SOS before SOF", pos - 2);
            parse_sos(seg, state);
            scan_start = pos + length; // entropy data begins after the segment
        }
        // APPn / COM / other tables: skipped via the declared length.
        pos += length;
    }

    for (const auto& comp : state.components) {
        if (!state.quant[comp.quant_id])
            fail("scan uses undefined quantization table " + std::to_string(comp.quant_id),
                 scan_start);
        if (!state.dc_present[comp.dc_id] || !state.ac_present[comp.ac_id])
            fail("scan uses an undefined huffman table", scan_start);
    }

    const int blocks_w = (state.width + 7) / 8;
    const int blocks_h = (state.height + 7) / 8;
    std::vector<FloatPlane> planes;
    for (std::size_t c = 0; c < state.components.size(); ++c)
        planes.emplace_back(blocks_w * 8, blocks_h * 8);

    BitReader bits(stream, scan_start);
    std::vector<int> dc_pred(state.components.size(), 0);
    for (int by = 0; by < blocks_h; ++by) {
        for (int bx = 0; bx < blocks_w; ++bx) {
            for (std::size_t c = 0; c < state.components.size(); ++c) {
                const ComponentInfo& comp = state.components[c];
                const QuantTable& table = *state.quant[comp.quant_id];

                std::array<double, 64> coefs{};
                const int dc_cat = bits.decode_symbol(state.dc_tables[comp.dc_id]);
                if (dc_cat > 11)
                    fail("DC category out of range", bits.pos());
                int diff = 0;
                if (dc_cat > 0)
                    diff = extend(bits.receive(dc_cat), dc_cat);
                dc_pred[c] += diff;
                coefs[0] = static_cast<double>(dc_pred[c]) * table.zigzag[0];

                int z = 1;
                while (z < 64) {
                    const int symbol = bits.decode_symbol(state.ac_tables[comp.ac_id]);
                    const int run = symbol >> 4;
                    const int cat = symbol & 0x0F;
                    if (cat == 0) {
                        if (run == 15) { // ZRL
                            z += 16;
                            continue;
                        }
                        break; // EOB
                    }
                    z += run;
                    if (z > 63)
                        fail("AC run overruns the block", bits.pos());
                    const int value = extend(bits.receive(cat), cat);
                    coefs[zigzag_order()[z]] = static_cast<double>(value) * table.zigzag[z];
                    ++z;
                }

                const std::array<double, 64> spatial = idct_block(coefs);
                FloatPlane& plane = planes[c];
                for (int y = 0; y < 8; ++y)
                    for (int x = 0; x < 8; ++x) {
                        // Components reconstruct to 8-bit samples before any
                        // color transform, like every conformant decoder.
                        const long v = std::lround(spatial[8 * y + x] + 128.0);
                        plane.at(bx * 8 + x, by * 8 + y) =
                            static_cast<double>(std::clamp(v, 0L, 255L));
                    }
            }
        }
    }

    // Crop the padded planes to the declared frame size.
    std::vector<FloatPlane> cropped;
    for (const auto& plane : planes) {
        FloatPlane p(state.width, state.height);
        for (int y = 0; y < state.height; ++y)
            for (int x = 0; x < state.width; ++x)
                p.at(x, y) = plane.at(x, y);
        cropped.push_back(std::move(p));
    }

    if (cropped.size() == 3)
        return ycbcr_to_rgb(cropped[0], cropped[1], cropped[2]);

    Image img(state.width, state.height, 1);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const long v = std::lround(cropped[0].data[i]);
        img.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
    }
    return img;
}

} // namespace rdic
