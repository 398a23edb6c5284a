#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "pevs/errors.hpp"
#include "pevs/linalg.hpp"
#include "pevs/offline.hpp"
#include "pevs/problems.hpp"

using namespace pevs;

namespace {

std::vector<ParameterPoint> grid_1d(const std::vector<double>& vals) {
  std::vector<ParameterPoint> out;
  for (double v : vals) out.push_back({v});
  return out;
}

double mass_inner(const DenseMatrix& mass, const Vector& a, const Vector& b) {
  return dot(a, matvec(mass, b));
}

}  // namespace

TEST_CASE("inclusive ranges hit both endpoints") {
  const std::vector<double> g = range_grid(-0.9, 0.1, 0.9);
  REQUIRE(g.size() == 19);
  CHECK(g.front() == doctest::Approx(-0.9));
  CHECK(g.back() == doctest::Approx(0.9));
  CHECK(std::fabs(g[9]) < 1e-12);

  CHECK(range_grid(1.0, 0.4, 9.0).size() == 21);
  CHECK(range_grid(2.0, 1.0, 2.0).size() == 1);
  CHECK_THROWS_AS(range_grid(0.0, -1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(range_grid(1.0, 0.5, 0.0), ConfigError);
}

TEST_CASE("default splits match the benchmark grids") {
  const TrainTestSplit crossing = default_split(ProblemKind::Crossing);
  CHECK(crossing.training.size() == 19);
  CHECK(crossing.test.size() == 37);
  CHECK(crossing.training.front()[0] == doctest::Approx(-0.9));
  CHECK(crossing.training.back()[0] == doctest::Approx(0.9));

  CHECK(default_split(ProblemKind::Oscillator).training.size() == 21);
  CHECK(default_split(ProblemKind::Oscillator).test.size() == 41);
  CHECK(default_split(ProblemKind::NonAffine).training.size() == 18);
  CHECK(default_split(ProblemKind::Nonlinear1D).training.size() == 21);

  const TrainTestSplit two = default_split(ProblemKind::TwoParam, 42);
  CHECK(two.training.size() == 64);
  CHECK(two.test.size() == 30);
  const ParameterBox box = parameter_space(ProblemKind::TwoParam);
  for (const auto& mu : two.training) CHECK(box.contains(mu));
  for (const auto& mu : two.test) CHECK(box.contains(mu));

  // Same seed gives the same random test points; a different seed does not.
  const TrainTestSplit again = default_split(ProblemKind::TwoParam, 42);
  CHECK(again.test == two.test);
  const TrainTestSplit other = default_split(ProblemKind::TwoParam, 43);
  CHECK(other.test != two.test);
}

TEST_CASE("snapshot generation validates its inputs") {
  CHECK_THROWS_AS(generate_snapshots(ProblemKind::Crossing, {}, 1, 8), ConfigError);
  CHECK_THROWS_AS(generate_snapshots(ProblemKind::Crossing, grid_1d({0.0}), 0, 8), ConfigError);
  CHECK_THROWS_AS(generate_snapshots(ProblemKind::Nonlinear1D, grid_1d({2.0}), 2, 32),
                  ConfigError);
  CHECK_THROWS_AS(generate_snapshots(ProblemKind::Crossing, grid_1d({1.5}), 1, 8),
                  ParameterOutOfRange);
}

TEST_CASE("snapshots store normalized eigenpairs in ascending order") {
  const std::vector<ParameterPoint> grid = grid_1d(range_grid(-0.9, 0.3, 0.9));
  const SnapshotSet snaps = generate_snapshots(ProblemKind::Crossing, grid, 3, 10);
  REQUIRE(snaps.num_parameters() == grid.size());
  REQUIRE(snaps.num_indices() == 3);
  REQUIRE(snaps.eigenvectors.size() == 3);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const DiscreteEVP evp = assemble(ProblemKind::Crossing, grid[i], 10);
    const std::vector<double> exact = exact_crossing_eigs(grid[i], 3);
    for (std::size_t j = 0; j < 3; ++j) {
      if (j > 0) CHECK(snaps.eigenvalues[j][i] >= snaps.eigenvalues[j - 1][i]);
      // Coarse mesh, so just a sanity bound against the exact value.
      CHECK(std::fabs(snaps.eigenvalues[j][i] - exact[j]) < 0.05 * exact[j]);

      const Vector u = snaps.eigenvectors[j].col(i);
      CHECK(mass_inner(evp.mass, u, u) == doctest::Approx(1.0).epsilon(1e-9));
      // Residual of the generalized eigenproblem.
      Vector r = matvec(evp.stiffness, u);
      const Vector mu_vec = matvec(evp.mass, u);
      for (std::size_t t = 0; t < r.size(); ++t) r[t] -= snaps.eigenvalues[j][i] * mu_vec[t];
      CHECK(norm2(r) < 1e-8 * snaps.eigenvalues[j][i]);
    }
  }
}

TEST_CASE("sign alignment keeps consecutive overlaps nonnegative") {
  const std::vector<ParameterPoint> grid = grid_1d(range_grid(-0.9, 0.2, 0.9));
  const SnapshotSet snaps = generate_snapshots(ProblemKind::Crossing, grid, 2, 10);
  const DenseMatrix mass = assemble_mass(ProblemKind::Crossing, grid[0], 10);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const Vector prev = snaps.eigenvectors[j].col(i - 1);
      const Vector cur = snaps.eigenvectors[j].col(i);
      CHECK(mass_inner(mass, prev, cur) >= -1e-12);
    }
}

TEST_CASE("sign alignment is a projection onto a canonical gauge") {
  const std::vector<ParameterPoint> grid = grid_1d(range_grid(-0.9, 0.45, 0.9));
  const SnapshotSet snaps = generate_snapshots(ProblemKind::Crossing, grid, 2, 8);

  // Flipping every column and re-aligning restores the original columns.
  SnapshotSet flipped = snaps;
  for (DenseMatrix& m : flipped.eigenvectors)
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = -m(i, j);
  const SnapshotSet realigned = align_signs(std::move(flipped));
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < snaps.eigenvectors[j].rows(); ++i)
      for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(realigned.eigenvectors[j](i, k) ==
              doctest::Approx(snaps.eigenvectors[j](i, k)).epsilon(1e-14));

  // Idempotent on already-aligned data.
  const SnapshotSet twice = align_signs(snaps);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(twice.eigenvectors[j].data()[0] == snaps.eigenvectors[j].data()[0]);
}

TEST_CASE("crossing-point snapshots are pure modes, not arbitrary mixtures") {
  // At mu=0 the second and third eigenvalues coincide and the second-index
  // branch switches between two separable modes. The snapshot stored at the
  // crossing must coincide with one of them, not a mixture of both.
  const std::vector<ParameterPoint> grid = grid_1d({-0.1, 0.0, 0.1});
  const SnapshotSet snaps = generate_snapshots(ProblemKind::Crossing, grid, 2, 12);
  const DenseMatrix mass = assemble_mass(ProblemKind::Crossing, {0.0}, 12);
  const Vector at_zero = snaps.eigenvectors[1].col(1);
  const double with_before = std::fabs(mass_inner(mass, at_zero, snaps.eigenvectors[1].col(0)));
  const double with_after = std::fabs(mass_inner(mass, at_zero, snaps.eigenvectors[1].col(2)));
  // A 50/50 mixture would overlap both neighbors at ~0.7.
  CHECK(std::max(with_before, with_after) > 0.999);
  CHECK(std::min(with_before, with_after) < 0.05);
}

TEST_CASE("second-index crossing snapshots span exactly two modes") {
  const std::vector<ParameterPoint> grid = grid_1d(range_grid(-0.9, 0.1, 0.9));
  const SnapshotSet snaps = generate_snapshots(ProblemKind::Crossing, grid, 2, 10);
  const SvdResult svd = thin_svd(snaps.eigenvectors[1]);
  CHECK(svd.singular_values[1] > 1e-3 * svd.singular_values[0]);
  CHECK(svd.singular_values[2] < 1e-8 * svd.singular_values[0]);
}

TEST_CASE("single-parameter snapshot sets work") {
  const SnapshotSet snaps = generate_snapshots(ProblemKind::Oscillator, grid_1d({2.0}), 1, 8);
  CHECK(snaps.num_parameters() == 1);
  CHECK(snaps.eigenvectors[0].cols() == 1);
  CHECK(snaps.eigenvalues[0][0] > 0.0);
}

TEST_CASE("snapshot generation covers every problem kind") {
  CHECK_NOTHROW(generate_snapshots(ProblemKind::NonAffine, grid_1d({1.0, 4.0, 8.0}), 1, 8));
  CHECK_NOTHROW(generate_snapshots(ProblemKind::Nonlinear1D, grid_1d({1.0, 5.0, 9.0}), 1, 32));
  CHECK_NOTHROW(
      generate_snapshots(ProblemKind::TwoParam, {{0.4, 0.4}, {1.4, 1.4}, {0.9, 0.9}}, 1, 8));
}

TEST_CASE("snapshot generation is deterministic") {
  const std::vector<ParameterPoint> grid = grid_1d({-0.5, 0.0, 0.5});
  const SnapshotSet a = generate_snapshots(ProblemKind::Crossing, grid, 2, 8);
  const SnapshotSet b = generate_snapshots(ProblemKind::Crossing, grid, 2, 8);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(a.eigenvalues[j] == b.eigenvalues[j]);
    for (std::size_t i = 0; i < a.eigenvectors[j].rows(); ++i)
      for (std::size_t k = 0; k < 3; ++k)
        CHECK(a.eigenvectors[j](i, k) == b.eigenvectors[j](i, k));
  }
}
