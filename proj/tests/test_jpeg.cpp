#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rdic/jpeg.hpp"
#include "rdic/metrics.hpp"

#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace rdic;
using rdic::testing::Rng;

namespace {

// Annex K base tables in natural order, kept independently of the library.
constexpr std::array<int, 64> kLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
};
constexpr std::array<int, 64> kChromaBase = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
};

std::array<double, 64> random_block(Rng& rng, double lo = -128.0, double hi = 127.0) {
    std::array<double, 64> block{};
    for (auto& v : block)
        v = rng.uniform(lo, hi);
    return block;
}

double max_abs_diff(const std::array<double, 64>& a, const std::array<double, 64>& b) {
    double worst = 0.0;
    for (int i = 0; i < 64; ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

// Marker bytes of all segments up to and including SOS.
std::vector<std::uint8_t> marker_sequence(const JpegStream& s) {
    std::vector<std::uint8_t> markers;
    REQUIRE(s.size() > 4);
    REQUIRE(s[0] == 0xFF);
    REQUIRE(s[1] == 0xD8);
    markers.push_back(0xD8);
    std::size_t pos = 2;
    while (pos + 4 <= s.size()) {
        REQUIRE(s[pos] == 0xFF);
        const std::uint8_t marker = s[pos + 1];
        markers.push_back(marker);
        const std::size_t length = (static_cast<std::size_t>(s[pos + 2]) << 8) | s[pos + 3];
        pos += 2 + length;
        if (marker == 0xDA)
            break;
    }
    return markers;
}

// Bitwise equality of the pixels covered by RoI blocks.
bool roi_pixels_identical(const Image& a, const Image& b, const BlockQualityMap& blocks) {
    for (int by = 0; by < blocks.blocks_h; ++by)
        for (int bx = 0; bx < blocks.blocks_w; ++bx) {
            if (!blocks.is_roi(bx, by))
                continue;
            for (int y = by * 8; y < std::min((by + 1) * 8, a.height); ++y)
                for (int x = bx * 8; x < std::min((bx + 1) * 8, a.width); ++x)
                    for (int c = 0; c < a.channels; ++c)
                        if (a.at(x, y, c) != b.at(x, y, c))
                            return false;
        }
    return true;
}

BlockQualityMap uniform_blocks(int width, int height, bool roi) {
    RoiMask mask(width, height);
    if (roi)
        std::fill(mask.bits.begin(), mask.bits.end(), 1);
    return block_project(mask);
}

} // namespace

TEST_CASE("tables: quality 50 reproduces the base tables") {
    const QuantTablePair q50 = quality_to_tables(50);
    for (int i = 0; i < 64; ++i) {
        CHECK(q50.luma.divisor_natural(i) == kLumaBase[i]);
        CHECK(q50.chroma.divisor_natural(i) == kChromaBase[i]);
    }
}

TEST_CASE("tables: quality 100 clamps every divisor to one") {
    const QuantTablePair q100 = quality_to_tables(100);
    for (int z = 0; z < 64; ++z) {
        CHECK(q100.luma.zigzag[z] == 1);
        CHECK(q100.chroma.zigzag[z] == 1);
    }
}

TEST_CASE("tables: quality 90 scales the luma DC divisor to 3") {
    const QuantTablePair q90 = quality_to_tables(90);
    CHECK(q90.luma.zigzag[0] == 3);
    CHECK(q90.luma.divisor_natural(0) == 3);
}

TEST_CASE("tables: low qualities use the 5000/q branch") {
    // q=10: scale 500, luma DC 16 -> (16*500+50)/100 = 80
    CHECK(quality_to_tables(10).luma.zigzag[0] == 80);
    // q=1: scale 5000, everything clamps to 255 except nothing stays below
    const QuantTablePair q1 = quality_to_tables(1);
    for (int z = 0; z < 64; ++z)
        CHECK(q1.luma.zigzag[z] == 255);
}

TEST_CASE("tables: quality out of range is rejected") {
    CHECK_THROWS_AS(quality_to_tables(0), Error);
    CHECK_THROWS_AS(quality_to_tables(101), Error);
}

TEST_CASE("dct: constant blocks") {
    std::array<double, 64> zeros{};
    const auto flat = fdct_block(zeros);
    for (double v : flat)
        CHECK(std::abs(v) <= 1e-12);

    std::array<double, 64> bright{};
    bright.fill(127.0); // samples 255 after the -128 shift
    const auto coefs = fdct_block(bright);
    CHECK(coefs[0] == doctest::Approx(1016.0).epsilon(1e-12));
    for (int i = 1; i < 64; ++i)
        CHECK(std::abs(coefs[i]) <= 1e-10);

    // DC-only inversion lands back on the flat block.
    std::array<double, 64> dc_only{};
    dc_only[0] = 1016.0;
    const auto spatial = idct_block(dc_only);
    for (double v : spatial)
        CHECK(v == doctest::Approx(127.0).epsilon(1e-12));

    const auto nothing = idct_block(zeros);
    for (double v : nothing)
        CHECK(v == 0.0);
}

TEST_CASE("dct: matches the definitional sums and inverts exactly") {
    Rng rng(0xDC7);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto block = random_block(rng);
        const auto fast = fdct_block(block);
        const auto slow = testing::reference_fdct(block);
        CHECK(max_abs_diff(fast, slow) <= 1e-10);

        const auto back = idct_block(fast);
        CHECK(max_abs_diff(back, block) <= 1e-10);

        const auto slow_back = testing::reference_idct(fast);
        CHECK(max_abs_diff(idct_block(fast), slow_back) <= 1e-10);
    }
}

TEST_CASE("quantize: rounds half away from zero") {
    QuantTable table;
    table.zigzag.fill(16);
    std::array<double, 64> coefs{};
    coefs[0] = 16.0;
    coefs[1] = -24.0;
    coefs[2] = 8.0;
    coefs[3] = -8.0;
    const CoefficientBlock q = quantize_block(coefs, table);
    CHECK(q.values[0] == 1);
    CHECK(q.values[1] == -2);
    CHECK(q.values[2] == 1);
    CHECK(q.values[3] == -1);

    QuantTable ones;
    ones.zigzag.fill(1);
    std::array<double, 64> reals{};
    reals[5] = 3.4;
    reals[6] = -3.5;
    const CoefficientBlock r = quantize_block(reals, ones, 2);
    CHECK(r.values[5] == 3);
    CHECK(r.values[6] == -4);
    CHECK(r.component == 2);
}

TEST_CASE("encode: JFIF framing and marker order") {
    const Image color = testing::make_gradient(24, 17, 3);
    const JpegStream stream = encode(color, 75);
    REQUIRE(stream.size() > 4);
    CHECK(stream[0] == 0xFF);
    CHECK(stream[1] == 0xD8);
    CHECK(stream[2] == 0xFF);
    CHECK(stream[3] == 0xE0);
    CHECK(stream[stream.size() - 2] == 0xFF);
    CHECK(stream.back() == 0xD9);

    const auto markers = marker_sequence(stream);
    const std::vector<std::uint8_t> want_color = {0xD8, 0xE0, 0xDB, 0xDB, 0xC0,
                                                  0xC4, 0xC4, 0xC4, 0xC4, 0xDA};
    CHECK(markers == want_color);

    const Image gray = testing::make_gradient(24, 17, 1);
    const auto gray_markers = marker_sequence(encode(gray, 75));
    const std::vector<std::uint8_t> want_gray = {0xD8, 0xE0, 0xDB, 0xC0, 0xC4, 0xC4, 0xDA};
    CHECK(gray_markers == want_gray);
}

TEST_CASE("encode: deterministic across runs") {
    const Image img = testing::make_smooth_noise(40, 40, 8, 3, 0xFEED);
    CHECK(encode(img, 80) == encode(img, 80));
}

TEST_CASE("codec: mid-gray flat images survive any quality exactly") {
    // 128 level-shifts to zero, so every coefficient quantizes to zero.
    for (int q : {1, 10, 50, 90, 100}) {
        Image gray(20, 12, 1);
        std::fill(gray.data.begin(), gray.data.end(), 128);
        const Image back = decode(encode(gray, q));
        CHECK(back == gray);
    }
}

TEST_CASE("codec: flat images stay flat, value within the DC rounding step") {
    // Only the DC coefficient is nonzero; its quantization can shift the
    // level by at most divisor/16 after the 1/8 DC gain.
    for (int q : {10, 50, 90, 100}) {
        const int dc_divisor = quality_to_tables(q).luma.zigzag[0];
        Image gray(20, 12, 1);
        std::fill(gray.data.begin(), gray.data.end(), 131);
        const Image back = decode(encode(gray, q));
        for (auto v : back.data)
            CHECK(v == back.data[0]);
        CHECK(std::abs(static_cast<int>(back.data[0]) - 131) <= dc_divisor / 16 + 1);
    }
    // At quality 100 the divisor is 1 and the value is exact.
    Image gray(20, 12, 1);
    std::fill(gray.data.begin(), gray.data.end(), 131);
    CHECK(decode(encode(gray, 100)) == gray);
}

TEST_CASE("codec: round trip quality on a gradient") {
    const Image img = testing::make_gradient(64, 64, 3);
    const Image back = decode(encode(img, 90));
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    const RegionMetrics m = region_metrics(img, back);
    CHECK(m.psnr_total_db >= 30.0);
}

TEST_CASE("codec: non-multiple-of-8 dimensions round trip") {
    const Image img = testing::make_smooth_noise(37, 23, 8, 3, 0xAB);
    const Image back = decode(encode(img, 85));
    CHECK(back.width == 37);
    CHECK(back.height == 23);
    const RegionMetrics m = region_metrics(img, back);
    CHECK(m.psnr_total_db >= 28.0);
}

TEST_CASE("encode: size grows with quality") {
    const Image img = testing::make_smooth_noise(64, 64, 8, 3, 0xCAFE);
    const auto s10 = encode(img, 10).size();
    const auto s50 = encode(img, 50).size();
    const auto s90 = encode(img, 90).size();
    const auto s100 = encode(img, 100).size();
    CHECK(s10 <= s50);
    CHECK(s50 <= s90);
    CHECK(s90 <= s100);
    CHECK(s50 < s100);
}

TEST_CASE("decode: distinct position-reporting errors") {
    CHECK_THROWS_WITH_AS(decode(JpegStream{0x00, 0x11, 0x22}),
                         doctest::Contains("SOI"), ParseError);
    CHECK_THROWS_AS(decode(JpegStream{}), ParseError);

    // Truncation inside the entropy data.
    const Image img = testing::make_gradient(16, 16, 1);
    JpegStream stream = encode(img, 80);
    JpegStream cut(stream.begin(), stream.begin() + stream.size() / 2);
    CHECK_THROWS_AS(decode(cut), ParseError);

    // Garbage where a marker should be.
    JpegStream garbled = stream;
    garbled[2] = 0x12;
    CHECK_THROWS_WITH_AS(decode(garbled), doctest::Contains("marker"), ParseError);

    // Progressive SOF is refused by name.
    JpegStream progressive = stream;
    REQUIRE(progressive[3] == 0xE0);
    // walk to SOF0 and flip it to SOF2
    std::size_t pos = 2;
    while (!(progressive[pos] == 0xFF && progressive[pos + 1] == 0xC0))
        ++pos;
    progressive[pos + 1] = 0xC2;
    CHECK_THROWS_WITH_AS(decode(progressive), doctest::Contains("SOF"), ParseError);
}

TEST_CASE("adaptive: all-RoI map reproduces the uniform encode bit for bit") {
    const Image img = testing::make_shapes(48, 32, 0x51AB);
    const BlockQualityMap all_roi = uniform_blocks(48, 32, true);
    CHECK(encode_region_adaptive(img, all_roi, 85, 40) == encode(img, 85));
}

TEST_CASE("adaptive: all-BG at q_roi=100 equals the plain q_bg encode after decoding") {
    // With unit divisors the requantized coefficients are exactly the coarse
    // values times the coarse table, so both decodes see identical data.
    const Image img = testing::make_shapes(40, 40, 0x9A7);
    const BlockQualityMap all_bg = uniform_blocks(40, 40, false);
    const Image via_adaptive = decode(encode_region_adaptive(img, all_bg, 100, 50));
    const Image via_uniform = decode(encode(img, 50));
    CHECK(via_adaptive == via_uniform);
}

TEST_CASE("adaptive: q_roi below q_bg is rejected") {
    const Image img = testing::make_gradient(16, 16, 1);
    CHECK_THROWS_AS(encode_region_adaptive(img, uniform_blocks(16, 16, true), 40, 80), Error);
}

TEST_CASE("adaptive: block map dimensions must match the image") {
    const Image img = testing::make_gradient(32, 32, 1);
    CHECK_THROWS_AS(encode_region_adaptive(img, uniform_blocks(16, 16, true), 90, 50), Error);
}

TEST_CASE("adaptive: RoI blocks decode identically to the uniform encode") {
    Rng rng(0x40F1);
    const Image img = testing::make_landscape(64, 48, 3, 0x111);
    const Image uniform = decode(encode(img, 95));
    for (int trial = 0; trial < 10; ++trial) {
        RoiMask mask(64, 48);
        for (auto& b : mask.bits)
            b = rng.unit() < 0.3 ? 1 : 0;
        const BlockQualityMap blocks = block_project(mask);
        const Image adaptive = decode(encode_region_adaptive(img, blocks, 95, 35));
        CHECK(roi_pixels_identical(uniform, adaptive, blocks));
    }
}

TEST_CASE("adaptive: size lands between the uniform extremes") {
    const Image img = testing::make_landscape(96, 96, 3, 0x222);
    RoiMask mask(96, 96);
    for (int y = 30; y < 60; ++y)
        for (int x = 20; x < 70; ++x)
            mask.at(x, y) = 1;
    const BlockQualityMap blocks = block_project(mask);
    const auto adaptive = encode_region_adaptive(img, blocks, 90, 30).size();
    const auto hi = encode(img, 90).size();
    const auto lo = encode(img, 30).size();
    CHECK(adaptive <= hi);
    CHECK(adaptive >= lo);
    CHECK(adaptive < hi); // the background really is cheaper
}
