#include "doctest.h"
#include "generators.hpp"
#include "radsynth/error.hpp"
#include "radsynth/radiomics/matrices.hpp"
#include "texture_oracles.hpp"

using namespace radsynth;
using namespace radsynth::testing;

namespace {

struct RandomRoi {
  VoxelVolume v;
  BinaryMask m;
  int bins;
};

RandomRoi random_roi(Rng& rng) {
  const Dims dims = random_dims(rng, 6);
  const int bins = static_cast<int>(rng.uniform_int(2, 4));
  return {gaussian_volume(rng, dims), random_mask(rng, dims, 0.3 + 0.6 * rng.uniform()), bins};
}

VoxelVolume line_volume(std::initializer_list<float> values) {
  VoxelVolume::Storage data(static_cast<Index>(values.size()));
  Index i = 0;
  for (float v : values) data[i++] = v;
  return VoxelVolume(Dims(1, 1, static_cast<int>(values.size())), Spacing(1, 1, 1), data);
}

}  // namespace

TEST_CASE("discretization rules") {
  VoxelVolume::Storage data(4);
  data << 0, 10, 25, 26;
  const VoxelVolume v(Dims(4, 1, 1), Spacing(1, 1, 1), data);
  const BinaryMask all(Dims(4, 1, 1), Spacing(1, 1, 1), std::uint8_t{1});

  const auto width = discretize(v, all, FixedBinWidth{25});
  CHECK(width.gray_levels == 2);
  CHECK(width.levels[width.index(1, 1, 1)] == 1);
  CHECK(width.levels[width.index(2, 1, 1)] == 1);
  CHECK(width.levels[width.index(3, 1, 1)] == 2);
  CHECK(width.levels[width.index(4, 1, 1)] == 2);

  VoxelVolume::Storage two(2);
  two << 0, 1;
  const auto count = discretize(VoxelVolume(Dims(2, 1, 1), Spacing(1, 1, 1), two),
                                BinaryMask(Dims(2, 1, 1), Spacing(1, 1, 1), std::uint8_t{1}),
                                FixedBinCount{2});
  CHECK(count.levels[count.index(1, 1, 1)] == 1);
  CHECK(count.levels[count.index(2, 1, 1)] == 2);

  const auto constant = discretize(VoxelVolume(Dims(3, 3, 3), Spacing(1, 1, 1), 4.0f),
                                   BinaryMask(Dims(3, 3, 3), Spacing(1, 1, 1), std::uint8_t{1}),
                                   FixedBinCount{8});
  CHECK(constant.gray_levels == 1);
  CHECK(constant.voxel_count == 27);
  CHECK((constant.levels == 0 || constant.levels == 1).all());
  CHECK(discretize(VoxelVolume(Dims(2, 1, 1), Spacing(1, 1, 1), 4.0f),
                   BinaryMask(Dims(2, 1, 1), Spacing(1, 1, 1), std::uint8_t{1}), FixedBinWidth{25})
            .gray_levels == 1);

  auto code = [&](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::NotFound;
  };
  CHECK(code([&] { discretize(v, all, FixedBinCount{1}); }) == ErrorCode::BadParams);
  CHECK(code([&] { discretize(v, all, FixedBinWidth{0}); }) == ErrorCode::BadParams);
  CHECK(code([&] { discretize(v, BinaryMask(Dims(4, 1, 1), Spacing(1, 1, 1), std::uint8_t{0})); }) ==
        ErrorCode::EmptyMask);
}

TEST_CASE("bin edges are monotone and levels stay in range (property)") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = random_roi(rng);
    const auto roi = discretize(r.v, r.m, FixedBinCount{r.bins});
    REQUIRE(std::is_sorted(roi.bin_edges.begin(), roi.bin_edges.end()));
    REQUIRE(roi.levels.maxCoeff() <= roi.gray_levels);
    REQUIRE(roi.levels.minCoeff() >= 0);
    REQUIRE((roi.levels > 0).count() == roi.voxel_count);
  }
}

TEST_CASE("texture matrices equal brute-force enumeration on random ROIs") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_roi(rng);
    const auto roi = discretize(r.v, r.m, FixedBinCount{r.bins});
    const auto voxels = oracle_levels(r.v, r.m, r.bins);

    const auto glcm = glcm_matrices(roi);
    REQUIRE(glcm.size() == 13);
    for (std::size_t d = 0; d < 13; ++d) {
      REQUIRE(as_pair_counts(glcm[d]) == glcm_oracle(voxels, kDirections[d]));
      REQUIRE(glcm[d].counts == glcm[d].counts.transpose());
    }
    REQUIRE(as_pair_counts(glszm_matrix(roi)) == glszm_oracle(voxels));
    const auto glrlm = glrlm_matrices(roi);
    for (std::size_t d = 0; d < 13; ++d) {
      REQUIRE(as_pair_counts(glrlm[d]) == glrlm_oracle(voxels, kDirections[d]));
    }
  }
}

TEST_CASE("normalized matrices sum to one and conserve voxels (property)") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const auto r = random_roi(rng);
    const auto roi = discretize(r.v, r.m, FixedBinCount{r.bins});
    for (const auto& g : glcm_matrices(roi)) {
      if (!g.empty()) REQUIRE(std::abs(g.normalized().sum() - 1.0) < 1e-12);
    }
    const auto zones = glszm_matrix(roi);
    std::int64_t covered = 0;
    for (Index c = 0; c < zones.counts.cols(); ++c) covered += zones.column_value(c) * zones.counts.col(c).sum();
    REQUIRE(covered == roi.voxel_count);
    for (const auto& runs : glrlm_matrices(roi)) {
      std::int64_t visited = 0;
      for (Index c = 0; c < runs.counts.cols(); ++c) visited += runs.column_value(c) * runs.counts.col(c).sum();
      REQUIRE(visited == roi.voxel_count);
    }
  }
}

TEST_CASE("GLCM hand example along z") {
  const auto v = line_volume({0, 1, 0});
  const BinaryMask m(v.dims(), v.spacing(), std::uint8_t{1});
  const auto roi = discretize(v, m, FixedBinCount{2});
  const auto glcm = glcm_matrices(roi);
  const auto& axial = glcm[2];
  CHECK(axial.direction == std::array<int, 3>{0, 0, 1});
  CHECK(axial.counts(0, 1) == 2);
  CHECK(axial.counts(1, 0) == 2);
  CHECK(axial.counts(0, 0) == 0);
  CHECK(axial.normalized()(0, 1) == doctest::Approx(0.5));
  CHECK(glcm[0].empty());
}

TEST_CASE("constant ROI gives single-cell matrices") {
  const VoxelVolume v(Dims(3, 3, 3), Spacing(1, 1, 1), 2.0f);
  const BinaryMask m(v.dims(), v.spacing(), std::uint8_t{1});
  const auto roi = discretize(v, m);
  for (const auto& g : glcm_matrices(roi)) {
    REQUIRE(g.counts.rows() == 1);
    CHECK(g.normalized()(0, 0) == 1.0);
  }
  const auto zones = glszm_matrix(roi);
  CHECK(zones.total == 1);
  CHECK(zones.column_values == std::vector<int>{27});
}

TEST_CASE("GLSZM and GLRLM hand examples") {
  const auto v = line_volume({0, 0, 1, 1, 1});
  const BinaryMask m(v.dims(), v.spacing(), std::uint8_t{1});
  const auto roi = discretize(v, m, FixedBinCount{2});
  const auto zones = glszm_matrix(roi);
  CHECK(as_pair_counts(zones) == PairCounts{{{1, 2}, 1}, {{2, 3}, 1}});
  const auto runs = glrlm_matrices(roi);
  CHECK(as_pair_counts(runs[2]) == PairCounts{{{1, 2}, 1}, {{2, 3}, 1}});
  CHECK(as_pair_counts(runs[0]) == PairCounts{{{1, 1}, 2}, {{2, 1}, 3}});
}
