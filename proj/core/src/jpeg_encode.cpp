#include <cmath>
#include <string>

#include "jpeg_common.hpp"
#include "rdic/image.hpp"

namespace rdic {

namespace {

using namespace jpegdetail;

class BitWriter {
public:
    explicit BitWriter(JpegStream& out) : out_(out) {}

    void put_bits(std::uint32_t bits, int count) {
        for (int i = count - 1; i >= 0; --i) {
            buffer_ = static_cast<std::uint8_t>((buffer_ << 1) | ((bits >> i) & 1));
            if (++filled_ == 8) {
                emit(buffer_);
                buffer_ = 0;
                filled_ = 0;
            }
        }
    }

    // Pads the final partial byte with 1-bits.
    void flush() {
        if (filled_ > 0) {
            buffer_ = static_cast<std::uint8_t>(buffer_ << (8 - filled_));
            buffer_ |= static_cast<std::uint8_t>((1 << (8 - filled_)) - 1);
            emit(buffer_);
            buffer_ = 0;
            filled_ = 0;
        }
    }

private:
    void emit(std::uint8_t byte) {
        out_.push_back(byte);
        if (byte == 0xFF)
            out_.push_back(0x00); // byte stuffing
    }

    JpegStream& out_;
    std::uint8_t buffer_ = 0;
    int filled_ = 0;
};

void put_marker(JpegStream& out, std::uint8_t marker) {
    out.push_back(0xFF);
    out.push_back(marker);
}

void put_u16(JpegStream& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void write_app0(JpegStream& out) {
    put_marker(out, kAPP0);
    put_u16(out, 16);
    const char id[5] = {'J', 'F', 'I', 'F', '\0'};
    for (char c : id)
        out.push_back(static_cast<std::uint8_t>(c));
    out.push_back(1); // version 1.01
    out.push_back(1);
    out.push_back(0); // density units: none
    put_u16(out, 1);
    put_u16(out, 1);
    out.push_back(0); // no thumbnail
    out.push_back(0);
}

void write_dqt(JpegStream& out, const QuantTable& table, int id) {
    put_marker(out, kDQT);
    put_u16(out, 2 + 1 + 64);
    out.push_back(static_cast<std::uint8_t>(id)); // 8-bit precision, table id
    for (int z = 0; z < 64; ++z)
        out.push_back(static_cast<std::uint8_t>(table.zigzag[z]));
}

void write_sof0(JpegStream& out, int width, int height, int components) {
    put_marker(out, kSOF0);
    put_u16(out, static_cast<std::uint16_t>(8 + 3 * components));
    out.push_back(8); // sample precision
    put_u16(out, static_cast<std::uint16_t>(height));
    put_u16(out, static_cast<std::uint16_t>(width));
    out.push_back(static_cast<std::uint8_t>(components));
    for (int c = 0; c < components; ++c) {
        out.push_back(static_cast<std::uint8_t>(c + 1)); // component id
        out.push_back(0x11);                             // 1x1 sampling
        out.push_back(c == 0 ? 0 : 1);                   // quant table id
    }
}

void write_dht(JpegStream& out, const HuffmanSpec& spec, int table_class, int id) {
    put_marker(out, kDHT);
    put_u16(out, static_cast<std::uint16_t>(2 + 1 + 16 + spec.values.size()));
    out.push_back(static_cast<std::uint8_t>((table_class << 4) | id));
    for (std::uint8_t b : spec.bits)
        out.push_back(b);
    for (std::uint8_t v : spec.values)
        out.push_back(v);
}

void write_sos(JpegStream& out, int components) {
    put_marker(out, kSOS);
    put_u16(out, static_cast<std::uint16_t>(6 + 2 * components));
    out.push_back(static_cast<std::uint8_t>(components));
    for (int c = 0; c < components; ++c) {
        out.push_back(static_cast<std::uint8_t>(c + 1));
        out.push_back(c == 0 ? 0x00 : 0x11); // DC/AC table ids
    }
    out.push_back(0);    // spectral start
    out.push_back(63);   // spectral end
    out.push_back(0);    // successive approximation
}

// Level-shifted samples of one block, clamping reads to the plane so partial
// edge blocks replicate their border pixels.
std::array<double, 64> extract_block(const FloatPlane& plane, int bx, int by) {
    std::array<double, 64> samples{};
    for (int y = 0; y < 8; ++y) {
        const int sy = std::min(by * 8 + y, plane.height - 1);
        for (int x = 0; x < 8; ++x) {
            const int sx = std::min(bx * 8 + x, plane.width - 1);
            samples[8 * y + x] = plane.at(sx, sy) - 128.0;
        }
    }
    return samples;
}

void encode_block(BitWriter& writer, const CoefficientBlock& block, int& dc_pred,
                  const HuffmanEncoder& dc_huff, const HuffmanEncoder& ac_huff) {
    std::array<int, 64> zz{};
    for (int z = 0; z < 64; ++z)
        zz[z] = block.values[zigzag_order()[z]];

    const int diff = zz[0] - dc_pred;
    dc_pred = zz[0];
    const int dc_cat = bit_category(diff);
    writer.put_bits(dc_huff.code[dc_cat], dc_huff.length[dc_cat]);
    if (dc_cat > 0) {
        const int bits = diff >= 0 ? diff : diff + (1 << dc_cat) - 1;
        writer.put_bits(static_cast<std::uint32_t>(bits), dc_cat);
    }

    int run = 0;
    for (int z = 1; z < 64; ++z) {
        if (zz[z] == 0) {
            ++run;
            continue;
        }
        while (run > 15) {
            writer.put_bits(ac_huff.code[0xF0], ac_huff.length[0xF0]); // ZRL
            run -= 16;
        }
        const int cat = bit_category(zz[z]);
        const int symbol = (run << 4) | cat;
        writer.put_bits(ac_huff.code[symbol], ac_huff.length[symbol]);
        const int bits = zz[z] >= 0 ? zz[z] : zz[z] + (1 << cat) - 1;
        writer.put_bits(static_cast<std::uint32_t>(bits), cat);
        run = 0;
    }
    if (run > 0)
        writer.put_bits(ac_huff.code[0x00], ac_huff.length[0x00]); // EOB
}

JpegStream encode_internal(const Image& img, const QuantTablePair& roi_tables,
                           const QuantTablePair& bg_tables, const BlockQualityMap* blocks) {
    if (img.data.size() != img.sample_count())
        throw Error("encode: image data length does not match dimensions");
    if (img.channels != 1 && img.channels != 3)
        throw Error("encode: channel count must be 1 or 3");

    std::vector<FloatPlane> planes;
    if (img.channels == 3) {
        auto [y, cb, cr] = rgb_to_ycbcr(img);
        planes.push_back(std::move(y));
        planes.push_back(std::move(cb));
        planes.push_back(std::move(cr));
    } else {
        FloatPlane y(img.width, img.height);
        for (std::size_t i = 0; i < img.data.size(); ++i)
            y.data[i] = img.data[i];
        planes.push_back(std::move(y));
    }

    const int blocks_w = (img.width + 7) / 8;
    const int blocks_h = (img.height + 7) / 8;
    if (blocks && (blocks->blocks_w != blocks_w || blocks->blocks_h != blocks_h))
        throw Error("encode: block map is " + std::to_string(blocks->blocks_w) + "x" +
                    std::to_string(blocks->blocks_h) + " but the image needs " +
                    std::to_string(blocks_w) + "x" + std::to_string(blocks_h));

    JpegStream out;
    put_marker(out, kSOI);
    write_app0(out);
    write_dqt(out, roi_tables.luma, 0);
    if (img.channels == 3)
        write_dqt(out, roi_tables.chroma, 1);
    write_sof0(out, img.width, img.height, img.channels);
    write_dht(out, dc_luma_huffman(), 0, 0);
    write_dht(out, ac_luma_huffman(), 1, 0);
    if (img.channels == 3) {
        write_dht(out, dc_chroma_huffman(), 0, 1);
        write_dht(out, ac_chroma_huffman(), 1, 1);
    }
    write_sos(out, img.channels);

    const HuffmanEncoder dc_luma(dc_luma_huffman());
    const HuffmanEncoder ac_luma(ac_luma_huffman());
    const HuffmanEncoder dc_chroma(dc_chroma_huffman());
    const HuffmanEncoder ac_chroma(ac_chroma_huffman());

    BitWriter writer(out);
    std::vector<int> dc_pred(planes.size(), 0);
    for (int by = 0; by < blocks_h; ++by) {
        for (int bx = 0; bx < blocks_w; ++bx) {
            const bool roi = blocks == nullptr || blocks->is_roi(bx, by);
            for (std::size_t c = 0; c < planes.size(); ++c) {
                const bool luma = c == 0;
                const QuantTable& roi_table = luma ? roi_tables.luma : roi_tables.chroma;
                const std::array<double, 64> coefs = fdct_block(extract_block(planes[c], bx, by));
                CoefficientBlock q;
                if (roi) {
                    q = quantize_block(coefs, roi_table, static_cast<int>(c));
                } else {
                    // Quantize coarse, reconstruct, requantize with the table
                    // the stream declares.
                    const QuantTable& bg_table = luma ? bg_tables.luma : bg_tables.chroma;
                    const CoefficientBlock coarse =
                        quantize_block(coefs, bg_table, static_cast<int>(c));
                    std::array<double, 64> rebuilt{};
                    for (int i = 0; i < 64; ++i)
                        rebuilt[i] = static_cast<double>(coarse.values[i]) *
                                     bg_table.divisor_natural(i);
                    q = quantize_block(rebuilt, roi_table, static_cast<int>(c));
                }
                encode_block(writer, q, dc_pred[c], luma ? dc_luma : dc_chroma,
                             luma ? ac_luma : ac_chroma);
            }
        }
    }
    writer.flush();
    put_marker(out, kEOI);
    return out;
}

} // namespace

JpegStream encode(const Image& img, int quality) {
    const QuantTablePair tables = quality_to_tables(quality);
    return encode_internal(img, tables, tables, nullptr);
}

JpegStream encode_region_adaptive(const Image& img, const BlockQualityMap& blocks,
                                  int q_roi, int q_bg) {
    if (q_roi < q_bg)
        throw Error("encode_region_adaptive: q_roi (" + std::to_string(q_roi) +
                    ") must be at least q_bg (" + std::to_string(q_bg) + ")");
    return encode_internal(img, quality_to_tables(q_roi), quality_to_tables(q_bg), &blocks);
}

} // namespace rdic
