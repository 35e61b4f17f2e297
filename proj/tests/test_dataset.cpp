#include "rnsc/dataset.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>

using namespace rnsc;

namespace {

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

std::filesystem::path write_file(const std::string& name, const std::vector<unsigned char>& bytes) {
    const auto path = oracle::temp_path(name);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return path;
}

std::filesystem::path write_text(const std::string& name, const std::string& text) {
    const auto path = oracle::temp_path(name);
    std::ofstream(path) << text;
    return path;
}

std::vector<unsigned char> idx_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                      const std::vector<unsigned char>& pixels, std::uint32_t magic = kIdxImageMagic) {
    std::vector<unsigned char> out;
    put_be32(out, magic);
    put_be32(out, count);
    put_be32(out, rows);
    put_be32(out, cols);
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

std::vector<unsigned char> idx_labels(const std::vector<unsigned char>& labels) {
    std::vector<unsigned char> out;
    put_be32(out, kIdxLabelMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

}  // namespace

TEST(LoadIdx, TwoTinyImagesScaleTo01) {
    const auto path = write_file("tiny-images", idx_images(2, 2, 2, {0, 255, 0, 255, 0, 255, 0, 255}));
    const auto ps = load_idx(path);
    ASSERT_EQ(ps.size(), 2);
    ASSERT_EQ(ps.dim(), 4);
    EXPECT_FALSE(ps.has_labels());
    for (int i = 0; i < 2; ++i) {
        EXPECT_EQ(ps.points()(i, 0), 0.0);
        EXPECT_EQ(ps.points()(i, 1), 1.0);
        EXPECT_EQ(ps.points()(i, 2), 0.0);
        EXPECT_EQ(ps.points()(i, 3), 1.0);
    }
}

TEST(LoadIdx, AttachesLabels) {
    const auto images = write_file("lab-images", idx_images(3, 1, 2, {1, 2, 3, 4, 5, 6}));
    const auto labels = write_file("lab-labels", idx_labels({7, 3, 7}));
    const auto ps = load_idx(images, labels);
    ASSERT_TRUE(ps.has_labels());
    // ids follow sorted raw values: 3 -> 0, 7 -> 1
    EXPECT_EQ(*ps.labels(), (Labels{1, 0, 1}));
    EXPECT_EQ(ps.label_names(), (std::vector<std::string>{"3", "7"}));
}

TEST(LoadIdx, LabelMagicAsImagesIsFormatError) {
    const auto path = write_file("bad-magic", idx_images(1, 1, 1, {0}, kIdxLabelMagic));
    EXPECT_THROW(load_idx(path), FormatError);
}

TEST(LoadIdx, TruncatedPayloadIsLengthError) {
    const auto path = write_file("truncated", idx_images(2, 2, 2, {0, 1, 2, 3, 4}));
    EXPECT_THROW(load_idx(path), LengthError);
    const auto header_only = write_file("short-header", {0, 0, 8});
    EXPECT_THROW(load_idx(header_only), LengthError);
}

TEST(LoadIdx, CountMismatchIsConsistencyError) {
    const auto images = write_file("mm-images", idx_images(2, 1, 1, {0, 1}));
    const auto labels = write_file("mm-labels", idx_labels({0, 1, 1}));
    EXPECT_THROW(load_idx(images, labels), ConsistencyError);
}

TEST(LoadIdx, ValuesAlwaysInUnitInterval) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<unsigned char> pixels(4 * 9);
        for (auto& p : pixels) p = static_cast<unsigned char>(byte(rng));
        const auto ps = load_idx(write_file("rand-images", idx_images(4, 3, 3, pixels)));
        EXPECT_GE(ps.points().minCoeff(), 0.0);
        EXPECT_LE(ps.points().maxCoeff(), 1.0);
    }
}

TEST(LoadIdx, MnistTestSetShapeWhenAvailable) {
    const char* dir = std::getenv("RNSC_DATA_DIR");
    if (!dir) GTEST_SKIP() << "RNSC_DATA_DIR not set";
    const std::filesystem::path base(dir);
    if (!std::filesystem::exists(base / "t10k-images-idx3-ubyte")) GTEST_SKIP() << "MNIST files absent";
    const auto ps = load_idx(base / "t10k-images-idx3-ubyte", base / "t10k-labels-idx1-ubyte");
    EXPECT_EQ(ps.size(), 10000);
    EXPECT_EQ(ps.dim(), 784);
    EXPECT_EQ(ps.num_classes(), 10);
}

TEST(LoadCsv, LabelColumn) {
    const auto path = write_text("three.csv", "1,2,0\n3,4,0\n5,6,1\n");
    const auto ps = load_csv(path, 2);
    ASSERT_EQ(ps.size(), 3);
    ASSERT_EQ(ps.dim(), 2);
    EXPECT_EQ(*ps.labels(), (Labels{0, 0, 1}));
    EXPECT_EQ(ps.points()(2, 0), 5.0);
    EXPECT_EQ(ps.points()(2, 1), 6.0);
}

TEST(LoadCsv, NoLabelColumn) {
    const auto ps = load_csv(write_text("three-nolabel.csv", "1,2,0\n3,4,0\n5,6,1\n"));
    EXPECT_EQ(ps.size(), 3);
    EXPECT_EQ(ps.dim(), 3);
    EXPECT_FALSE(ps.has_labels());
}

TEST(LoadCsv, RaggedRowIsFormatError) {
    EXPECT_THROW(load_csv(write_text("ragged.csv", "1,2\n3\n")), FormatError);
}

TEST(LoadCsv, NonNumericCellIsParseError) {
    EXPECT_THROW(load_csv(write_text("nonnum.csv", "1,2\n3,x\n")), ParseError);
}

TEST(LoadCsv, HeaderAndStringLabelsFirstSeenOrder) {
    const auto path = write_text("header.csv", "x,y,class\r\n0.5,1,cat\r\n2,3,dog\r\n4,5,cat\r\n6,7,bird\r\n");
    const auto ps = load_csv(path, 2);
    EXPECT_EQ(ps.size(), 4);
    EXPECT_EQ(*ps.labels(), (Labels{0, 1, 0, 2}));
    EXPECT_EQ(ps.label_names(), (std::vector<std::string>{"cat", "dog", "bird"}));
}

TEST(LoadCsv, WriteThenLoadRoundTrips) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto x = oracle::random_points(25, 4, seed);
        x *= std::pow(10.0, static_cast<double>(seed) * 3.0 - 6.0);
        Labels labels(25);
        for (int i = 0; i < 25; ++i) labels[i] = i % 3;
        const PointSet ps(x, labels);
        const auto path = oracle::temp_path("roundtrip.csv");
        write_csv(ps, path);
        const auto back = load_csv(path, 4);
        ASSERT_EQ(back.size(), 25);
        ASSERT_EQ(back.dim(), 4);
        for (int i = 0; i < 25; ++i)
            for (int j = 0; j < 4; ++j)
                EXPECT_LE(std::abs(back.points()(i, j) - x(i, j)), 1e-12 * std::abs(x(i, j)));
        EXPECT_EQ(*back.labels(), labels);
    }
}

TEST(MakeBlobs, ShapeAndBalancedLabels) {
    const auto ps = make_blobs(100, 3, 2, 0.05, 0, 7);
    EXPECT_EQ(ps.size(), 300);
    EXPECT_EQ(ps.dim(), 2);
    std::vector<int> counts(3, 0);
    for (int l : *ps.labels()) ++counts[l];
    EXPECT_EQ(counts, (std::vector<int>{100, 100, 100}));
}

TEST(MakeBlobs, NoiseDimsAppendColumns) {
    EXPECT_EQ(make_blobs(100, 3, 2, 0.05, 8, 7).dim(), 10);
}

TEST(MakeBlobs, SameSeedBitIdentical) {
    const auto a = make_blobs(50, 4, 3, 0.2, 2, 99);
    const auto b = make_blobs(50, 4, 3, 0.2, 2, 99);
    ASSERT_EQ(a.points().size(), b.points().size());
    EXPECT_EQ(std::memcmp(a.points().data(), b.points().data(), sizeof(double) * a.points().size()), 0);
    EXPECT_EQ(*a.labels(), *b.labels());
    const auto c = make_blobs(50, 4, 3, 0.2, 2, 100);
    EXPECT_FALSE(a.points().isApprox(c.points()));
}

TEST(MakeBlobs, MeansAreUnitSeparated) {
    const auto ps = make_blobs(2000, 3, 2, 0.01, 0, 3);
    const auto means = [&] {
        RowMatrix m = RowMatrix::Zero(3, 2);
        for (int i = 0; i < ps.size(); ++i) m.row((*ps.labels())[i]) += ps.points().row(i);
        return RowMatrix(m / 2000.0);
    }();
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) EXPECT_GE((means.row(a) - means.row(b)).norm(), 0.99);
}

TEST(MakeBlobs, RejectsNonPositiveArguments) {
    EXPECT_THROW(make_blobs(0, 3, 2, 0.1, 0, 1), ParameterError);
    EXPECT_THROW(make_blobs(10, 3, 2, 0.0, 0, 1), ParameterError);
    EXPECT_THROW(make_blobs(10, 3, 2, 0.1, -1, 1), ParameterError);
}

TEST(PointSetInvariants, RejectsNonFiniteAndBadLabels) {
    RowMatrix x = RowMatrix::Zero(2, 2);
    x(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(PointSet{x}, ParameterError);
    EXPECT_THROW(PointSet(RowMatrix::Zero(2, 2), Labels{0}), ConsistencyError);
    EXPECT_THROW(PointSet(RowMatrix::Zero(2, 2), Labels{0, 2}), ParameterError);
    EXPECT_THROW(PointSet(RowMatrix(0, 2)), ParameterError);
}
