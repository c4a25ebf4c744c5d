#include "docret/errors.hpp"
#include "docret/feature_model.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace docret;

TEST(CorpusManifest, SortsBytewise)
{
    const auto m = testutil::manifest({"b", "B", "a10", "a9", "a"});
    std::vector<std::string> names;
    for (const auto& id : m.images()) {
        names.push_back(id.name);
    }
    EXPECT_EQ(names, (std::vector<std::string>{"B", "a", "a10", "a9", "b"}));
    EXPECT_EQ(m.index_of(ImageId("a9")), 3u);
    EXPECT_FALSE(m.index_of(ImageId("zz")).has_value());
}

TEST(CorpusManifest, BytewiseOrderTreatsHighBytesAsUnsigned)
{
    // "\xc3\xa9" (e-acute) must sort after plain ASCII
    const auto m = testutil::manifest({"\xc3\xa9", "z"});
    EXPECT_EQ(m[0].name, "z");
}

TEST(CorpusManifest, RejectsDuplicatesAndEmptyIds)
{
    EXPECT_THROW(testutil::manifest({"a", "b", "a"}), ValidationError);
    EXPECT_THROW(testutil::manifest({"a", ""}), ValidationError);
}

TEST(CorpusManifest, TextRoundTrip)
{
    std::istringstream in("q2\nq1\r\n\nq3\n");
    const auto m = read_manifest(in, CorpusRole::query);
    EXPECT_EQ(m.size(), 3u);
    EXPECT_EQ(m.role(), CorpusRole::query);
    std::ostringstream out;
    write_manifest(m, out);
    EXPECT_EQ(out.str(), "q1\nq2\nq3\n");
}

TEST(FeatureMatrix, ValidatesShapeAndFiniteness)
{
    const auto m = testutil::manifest({"a", "b"});
    EXPECT_THROW(FeatureMatrix({"x", 256}, m, RowMatrixXd::Zero(3, 2)), AlignmentError);
    RowMatrixXd bad = RowMatrixXd::Zero(2, 2);
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(FeatureMatrix({"x", 256}, m, bad), ValidationError);
    bad(1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(FeatureMatrix({"x", 256}, m, bad), ValidationError);
    EXPECT_THROW(FeatureMatrix({"x", 0}, m, RowMatrixXd::Zero(2, 2)), ValidationError);
    EXPECT_THROW(FeatureMatrix({"x", 256}, m, RowMatrixXd::Zero(2, 0)), ValidationError);
}

TEST(Align, SingleMatrixInOrderIsUnchanged)
{
    const auto fm = testutil::matrix("m", testutil::manifest({"a", "b"}), {{1, 2}, {3, 4}});
    EXPECT_EQ(align(fm, fm.manifest()), fm);
}

TEST(Align, ReordersRowsByIdentity)
{
    // the same content under two differently-ordered sources
    const auto target = testutil::manifest({"a", "b", "c"});
    const auto m1 = testutil::matrix("m1", testutil::manifest({"a", "b", "c", "extra"}),
                                     {{1, 1}, {2, 2}, {3, 3}, {9, 9}});
    const auto m2 = testutil::matrix("m2", testutil::manifest({"b", "c", "a"}),
                                     {{10, 0}, {20, 0}, {30, 0}});
    const auto out = align(std::vector<FeatureMatrix>{m1, m2}, target);
    ASSERT_EQ(out.size(), 2u);
    for (std::size_t i = 0; i < target.size(); ++i) {
        EXPECT_EQ(out[0].row(static_cast<Eigen::Index>(i)), m1.row(target[i]));
        EXPECT_EQ(out[1].row(static_cast<Eigen::Index>(i)), m2.row(target[i]));
    }
    EXPECT_EQ(out[0].rows(), 3);
}

TEST(Align, MissingImageNamesTheId)
{
    const auto fm = testutil::matrix("m", testutil::manifest({"q1", "q2"}), {{1}, {2}});
    try {
        align(fm, testutil::manifest({"q1", "q7"}));
        FAIL() << "expected AlignmentError";
    } catch (const AlignmentError& e) {
        EXPECT_NE(std::string(e.what()).find("q7"), std::string::npos);
    }
}

TEST(Align, IsIdempotent)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto big = testutil::numbered("img", 12);
        const FeatureMatrix fm({"m", 256}, big, testutil::random_values(rng, 12, 3));
        std::vector<ImageId> subset = big.images();
        std::shuffle(subset.begin(), subset.end(), rng);
        subset.resize(7);
        const CorpusManifest target(subset);
        const auto once = align(fm, target);
        EXPECT_EQ(align(once, target), once);
    }
}

TEST(CalibrationSet, ParsesAndValidates)
{
    std::istringstream in("q1\ta\nq2\tb\n");
    const auto set = read_calibration(in);
    ASSERT_EQ(set.size(), 2u);
    EXPECT_EQ(set.pairs()[1].original.name, "b");
    EXPECT_NO_THROW(set.validate_against(testutil::manifest({"a", "b"}), testutil::manifest({"q1", "q2"})));
    EXPECT_THROW(set.validate_against(testutil::manifest({"a"}), testutil::manifest({"q1", "q2"})),
                 ValidationError);
    EXPECT_THROW(set.validate_against(testutil::manifest({"a", "b"}), testutil::manifest({"q1"})),
                 ValidationError);
}

TEST(CalibrationSet, RejectsDuplicateQueriesAndBadLines)
{
    std::istringstream dup("q1\ta\nq1\tb\n");
    EXPECT_THROW(read_calibration(dup), ValidationError);
    std::istringstream bad("q1 a\n");
    EXPECT_THROW(read_calibration(bad), FormatError);
}

TEST(ModelTag, DefaultCropSizes)
{
    EXPECT_EQ(default_crop_size("googlenet"), 288u);
    EXPECT_EQ(default_crop_size("resnet-152"), 288u);
    EXPECT_EQ(default_crop_size("alexnet"), 256u);
    EXPECT_EQ(default_crop_size("vggnet-e"), 256u);
}
