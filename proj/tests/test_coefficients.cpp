#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "nld/coefficients.hpp"

using namespace nld;

namespace {

SpatialGrid unit(int n) { return build_grid(Bounds::interval(0.0, 1.0), n); }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST(ScalarField, Builders) {
  const SpatialGrid g = unit(4);
  EXPECT_DOUBLE_EQ(ScalarField::constant(g, 2.5)[3], 2.5);
  const auto a = ScalarField::affine(g, 1.0, {2.0, 0.0});
  EXPECT_DOUBLE_EQ(a[0], 1.25);
  EXPECT_DOUBLE_EQ(a[3], 2.75);
  const auto b = ScalarField::gaussian_bump(g, 0.5, 1.0, {0.375, 0.0}, 0.1);
  EXPECT_DOUBLE_EQ(b[1], 1.5);
  EXPECT_LT(b[3], b[2]);
  EXPECT_THROW(ScalarField::tabulated(g, {1.0, 2.0}), InvalidArgument);
}

TEST(ScalarField, RejectsNonFinite) {
  Eigen::VectorXd v(2);
  v << 1.0, std::nan("");
  EXPECT_THROW(ScalarField{v}, InvalidArgument);
}

TEST(ScalarField, FileWithCommentsAndDelimiters) {
  const auto p = write_temp("nld_scalar.txt", "# header\n1.5\n2.5, 9\n\n3.5 ; 9 # trailing\n4.5\t9\n");
  // The first column is read; consistent column counts are required from the first data row.
  EXPECT_THROW(ScalarField::from_file(unit(4), p), InvalidArgument);
  const auto q = write_temp("nld_scalar2.txt", "# header\n1.5\n2.5\n\n3.5 # trailing\n4.5\n");
  const auto f = ScalarField::from_file(unit(4), q);
  EXPECT_DOUBLE_EQ(f[2], 3.5);
  EXPECT_THROW(ScalarField::from_file(unit(5), q), InvalidArgument);
}

TEST(ScalarField, FileErrorsCarryLocation) {
  const auto p = write_temp("nld_bad.txt", "1\n2\nabc\n4\n");
  try {
    ScalarField::from_file(unit(4), p);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ScalarField::from_file(unit(4), "/nonexistent/nld.txt"), InvalidArgument);
}

TEST(ScalarField, ZeroSetAndFlags) {
  const auto f = ScalarField::tabulated(unit(5), {0.0, 1e-13, 0.5, 0.0, 2.0});
  EXPECT_EQ(zero_set(f), (std::vector<int>{0, 1, 3}));
  EXPECT_TRUE(f.nonnegative());
  EXPECT_TRUE(f.not_identically_zero());
  EXPECT_FALSE(ScalarField::constant(unit(3), 0.0).not_identically_zero());
}

TEST(CoefficientField, ConstantIrreducibleTwoSpecies) {
  Eigen::MatrixXd m(2, 2);
  m << -1.0, 0.5, 0.3, -2.0;
  const auto f = CoefficientField::constant(8, m);
  EXPECT_TRUE(f.cooperative());
  EXPECT_FALSE(f.nonnegative());
  EXPECT_TRUE(check_weak_irreducibility(f));
  EXPECT_TRUE(check_strong_irreducibility(f));
  EXPECT_FALSE(f.symmetric());
}

TEST(CoefficientField, DiagonalIsReducible) {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.0, 0.0, 1.0;
  const auto f = CoefficientField::constant(8, m);
  EXPECT_TRUE(f.cooperative());
  EXPECT_FALSE(check_weak_irreducibility(f));
  EXPECT_FALSE(check_strong_irreducibility(f));
}

TEST(CoefficientField, WeakButNotStrong) {
  // Coupling 1 -> 2 on the left half, 2 -> 1 on the right half.
  const SpatialGrid g = unit(6);
  const auto f = CoefficientField::from_function(g, 2, [](const Point& x) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    if (x[0] < 0.5) a(0, 1) = 1.0;
    else a(1, 0) = 1.0;
    return a;
  });
  EXPECT_TRUE(check_weak_irreducibility(f));
  EXPECT_FALSE(check_strong_irreducibility(f));
}

TEST(CoefficientField, ScalarIsStronglyIrreducible) {
  const auto f = CoefficientField::from_scalar(ScalarField::constant(unit(3), -1.0));
  EXPECT_TRUE(f.strongly_irreducible());
  EXPECT_TRUE(f.weakly_irreducible());
  EXPECT_TRUE(f.symmetric());
}

TEST(CoefficientField, NonCooperativeDetected) {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, -0.1, 1.0, 0.0;
  EXPECT_FALSE(CoefficientField::constant(3, m).cooperative());
}

TEST(CoefficientField, ArithmeticAndShapeChecks) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(2, 2);
  const auto a = CoefficientField::constant(3, m);
  const auto b = a.scaled(0.5) + a;
  EXPECT_DOUBLE_EQ(b.at(2)(1, 0), 1.5);
  EXPECT_THROW(a + CoefficientField::constant(4, m), InvalidArgument);
  EXPECT_THROW(CoefficientField(2, {Eigen::MatrixXd::Zero(3, 3)}), InvalidArgument);
}

TEST(CoefficientField, FileRowMajor) {
  const auto p = write_temp("nld_field.txt", "1 2 3 4\n5 6 7 8\n");
  const auto f = CoefficientField::from_file(unit(2), p);
  EXPECT_EQ(f.species(), 2);
  EXPECT_DOUBLE_EQ(f.at(1)(0, 1), 6.0);
  EXPECT_DOUBLE_EQ(f.at(1)(1, 0), 7.0);
  const auto q = write_temp("nld_field3.txt", "1 2 3\n5 6 7\n");
  EXPECT_THROW(CoefficientField::from_file(unit(2), q), InvalidArgument);
}
