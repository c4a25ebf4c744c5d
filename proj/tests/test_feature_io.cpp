#include "docret/errors.hpp"
#include "docret/feature_io.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace docret;

namespace {

std::string encode(const FeatureMatrix& m)
{
    std::ostringstream out;
    write_feature_file(m, out);
    return out.str();
}

FeatureMatrix decode(const std::string& bytes)
{
    std::istringstream in(bytes);
    return read_feature_file(in);
}

FeatureMatrix sample()
{
    return testutil::matrix("vggnet-e", testutil::manifest({"img_b", "img_a"}),
                            {{0.5, -1.25, 3.0}, {1e-3, 65504.0, -0.0}});
}

} // namespace

TEST(FeatureFile, EmptyMatrixKeepsItsDimension)
{
    const FeatureMatrix empty({"alexnet", 256}, CorpusManifest{}, 4);
    const auto bytes = encode(empty);
    const auto decoded = oracle::decode_fcbf(bytes);
    EXPECT_EQ(decoded.n, 0u);
    EXPECT_EQ(decoded.d, 4u);
    EXPECT_TRUE(decoded.values.empty());
    const auto back = decode(bytes);
    EXPECT_EQ(back.rows(), 0);
    EXPECT_EQ(back.dim(), 4);
}

TEST(FeatureFile, WritesAreByteDeterministic)
{
    EXPECT_EQ(encode(sample()), encode(sample()));
}

TEST(FeatureFile, IndependentDecoderSeesTheExactValues)
{
    const auto m = sample();
    const auto d = oracle::decode_fcbf(encode(m));
    EXPECT_EQ(d.model, "vggnet-e");
    EXPECT_EQ(d.crop, 256u);
    EXPECT_EQ(d.n, 2u);
    EXPECT_EQ(d.d, 3u);
    EXPECT_EQ(d.ids, (std::vector<std::string>{"img_a", "img_b"}));
    const std::vector<float> expected{0.5f, -1.25f, 3.0f, 1e-3f, 65504.0f, -0.0f};
    ASSERT_EQ(d.values.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(std::bit_cast<std::uint32_t>(d.values[i]), std::bit_cast<std::uint32_t>(expected[i]));
    }
}

TEST(FeatureFile, HeaderLayoutIsLittleEndian)
{
    const auto bytes = encode(testutil::matrix("ab", testutil::manifest({"x"}), {{1.0}}));
    const std::string expected_prefix = std::string("FCBF") + std::string("\x01\x00", 2)
        + std::string("\x02\x00", 2) + "ab" + std::string("\x00\x01\x00\x00", 4);
    EXPECT_EQ(bytes.substr(0, expected_prefix.size()), expected_prefix);
    // 1.0f = 0x3f800000
    EXPECT_EQ(bytes.substr(bytes.size() - 4), std::string("\x00\x00\x80\x3f", 4));
}

TEST(FeatureFile, RoundTripIsBitExact)
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> shape(0, 9);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = shape(rng);
        const auto d = shape(rng) + 1;
        // values representable in float32, spanning many magnitudes
        RowMatrixXd v = testutil::random_values(rng, n, d, -1e6, 1e6);
        v = round_to_f32(v);
        const FeatureMatrix m({"m" + std::to_string(trial), 256}, testutil::numbered("i", n), v);
        EXPECT_EQ(decode(encode(m)), m);
    }
}

TEST(FeatureFile, RejectsWrongMagic)
{
    auto bytes = encode(sample());
    bytes[0] = 'X';
    EXPECT_THROW(decode(bytes), FormatError);
}

TEST(FeatureFile, RejectsUnknownVersion)
{
    auto bytes = encode(sample());
    bytes[4] = 2;
    EXPECT_THROW(decode(bytes), FormatError);
}

TEST(FeatureFile, TruncatedPayloadIsCorruption)
{
    const auto m = testutil::matrix("m", testutil::manifest({"a", "b", "c"}), {{1, 2}, {3, 4}, {5, 6}});
    const auto bytes = encode(m);
    // drop the third row: declared n = 3, two rows of payload
    EXPECT_THROW(decode(bytes.substr(0, bytes.size() - 2 * 4)), CorruptionError);
    EXPECT_THROW(decode(bytes.substr(0, bytes.size() - 1)), CorruptionError);
}

TEST(FeatureFile, TrailingBytesAreCorruption)
{
    EXPECT_THROW(decode(encode(sample()) + "x"), CorruptionError);
}

TEST(FeatureFile, NaNInPayloadIsRejected)
{
    auto bytes = encode(testutil::matrix("m", testutil::manifest({"a"}), {{1.0}}));
    // quiet NaN 0x7fc00000
    bytes.replace(bytes.size() - 4, 4, std::string("\x00\x00\xc0\x7f", 4));
    EXPECT_THROW(decode(bytes), ValidationError);
}

TEST(FeatureFile, NonCanonicalIdOrderIsRejected)
{
    auto bytes = encode(testutil::matrix("m", testutil::manifest({"a", "b"}), {{1.0}, {2.0}}));
    const auto pos = bytes.find(std::string("\x01\x00" "a", 3));
    ASSERT_NE(pos, std::string::npos);
    bytes[pos + 2] = 'c'; // ids now read "c", "b"
    EXPECT_THROW(decode(bytes), FormatError);
}

TEST(FeatureFile, OutOfRangeDoubleIsRejectedOnWrite)
{
    const auto m = testutil::matrix("m", testutil::manifest({"a"}), {{1e300}});
    std::ostringstream out;
    EXPECT_THROW(write_feature_file(m, out), ValidationError);
}
