#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hybridyn/coarse_grain.hpp"
#include "hybridyn/field_ops.hpp"
#include "hybridyn/io.hpp"

using namespace hybridyn;

namespace {

const Mat<2> SIGMA1 = (Mat<2>() << 0, 1, 1, 0).finished();
const Mat<2> SIGMA3 = (Mat<2>() << 1, 0, 0, -1).finished();

template <class F>
ScalarField make_scalar(const PhaseGrid& g, F f) {
  ScalarField out(g);
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j) out.at(i, j) = f(g.x(i), g.p(j));
  return out;
}

// scalar profile times a constant matrix
template <class F>
MatrixField<2> make_matrix(const PhaseGrid& g, F f, const Mat<2>& m) {
  MatrixField<2> out(g);
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j) out.at(i, j) = f(g.x(i), g.p(j)) * m;
  out.hermitian = (m - m.adjoint()).cwiseAbs().maxCoeff() == 0.0;
  return out;
}

double gauss2(double x, double p, double var) {
  return std::exp(-(x * x + p * p) / (2.0 * var)) / (2.0 * M_PI * var);
}

template <class T>
double max_diff(const Field<T>& a, const Field<T>& b) {
  double d = 0.0;
  for (int c = 0; c < a.grid.size(); ++c)
    d = std::max(d, element_traits<T>::max_abs(a.v[c] - b.v[c]));
  return d;
}

}  // namespace

TEST_CASE("x derivative is exact on polynomials through degree two") {
  PhaseGrid g;  // [-8,8]^2, 128x128
  const ScalarField fx2 = make_scalar(g, [](double x, double) { return x * x; });
  const ScalarField d = partial_x(fx2);
  double err = 0.0;
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j)
      err = std::max(err, std::abs(d.at(i, j) - 2.0 * g.x(i)));
  // one-sided second-order edge stencils are also exact on quadratics
  REQUIRE(err < 1e-10);

  const ScalarField fp = make_scalar(g, [](double, double p) { return p; });
  REQUIRE(partial_x(fp).max_abs() <= 1e-13);

  const ScalarField fx = make_scalar(g, [](double x, double) { return x; });
  const ScalarField one = partial_x(fx);
  double err1 = 0.0;
  for (double v : one.v) err1 = std::max(err1, std::abs(v - 1.0));
  REQUIRE(err1 <= 1e-13);
}

TEST_CASE("p derivative mirrors the x derivative") {
  PhaseGrid g;
  const ScalarField fp2 = make_scalar(g, [](double, double p) { return p * p; });
  const ScalarField d = partial_p(fp2);
  double err = 0.0;
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j)
      err = std::max(err, std::abs(d.at(i, j) - 2.0 * g.p(j)));
  REQUIRE(err < 1e-10);
}

TEST_CASE("canonical bracket of the coordinates is one") {
  PhaseGrid g;
  const ScalarField fx = make_scalar(g, [](double x, double) { return x; });
  const ScalarField fp = make_scalar(g, [](double, double p) { return p; });

  const ScalarField xp = poisson_bracket(fx, fp);
  double err = 0.0;
  for (double v : xp.v) err = std::max(err, std::abs(v - 1.0));
  REQUIRE(err <= 1e-13);  // linear fields: exact everywhere, edges included

  const ScalarField px = poisson_bracket(fp, fx);
  err = 0.0;
  for (double v : px.v) err = std::max(err, std::abs(v + 1.0));
  REQUIRE(err <= 1e-13);
}

TEST_CASE("scalar bracket is antisymmetric to rounding") {
  PhaseGrid g;
  const ScalarField a =
      make_scalar(g, [](double x, double p) { return std::exp(-(x * x + p * p) / 2.0); });
  const ScalarField b = make_scalar(g, [](double x, double p) {
    return std::exp(-((x - 1.0) * (x - 1.0) + (p + 0.5) * (p + 0.5)) / 3.0);
  });
  const ScalarField ab = poisson_bracket(a, b);
  const ScalarField ba = poisson_bracket(b, a);
  double err = 0.0;
  for (int c = 0; c < g.size(); ++c) err = std::max(err, std::abs(ab.v[c] + ba.v[c]));
  REQUIRE(err <= 1e-13);
  REQUIRE(ab.hermitian);
}

TEST_CASE("matrix bracket keeps the written operator order") {
  PhaseGrid g;
  const auto lin_x = [](double x, double) { return x; };
  const auto lin_p = [](double, double p) { return p; };
  const MatrixField<2> A = make_matrix(g, lin_x, SIGMA3);
  const MatrixField<2> B = make_matrix(g, lin_p, SIGMA1);

  // dA/dx dB/dp - dA/dp dB/dx = sigma3 sigma1 = [[0,1],[-1,0]]
  const Mat<2> expect = (Mat<2>() << 0, 1, -1, 0).finished();
  const MatrixField<2> ab = poisson_bracket(A, B);
  double err = 0.0;
  for (const auto& m : ab.v) err = std::max(err, (m - expect).cwiseAbs().maxCoeff());
  REQUIRE(err <= 1e-12);

  // swapping the arguments gives -sigma1 sigma3, which here equals
  // sigma3 sigma1 again: the matrix bracket is not antisymmetric
  const MatrixField<2> ba = poisson_bracket(B, A);
  err = 0.0;
  for (const auto& m : ba.v) err = std::max(err, (m - expect).cwiseAbs().maxCoeff());
  REQUIRE(err <= 1e-12);

  // sigma3 sigma1 is anti-Hermitian, so the flag must have been dropped
  REQUIRE_FALSE(ab.hermitian);
  REQUIRE(ab.hermiticity_defect() > 1.0);
}

TEST_CASE("derivatives along distinct axes commute") {
  PhaseGrid g;
  const ScalarField f =
      make_scalar(g, [](double x, double p) { return std::exp(-(x * x + p * p) / 2.0); });
  const ScalarField xy = partial_p(partial_x(f));
  const ScalarField yx = partial_x(partial_p(f));
  REQUIRE(max_diff(xy, yx) <= 1e-12);
}

TEST_CASE("smoothing a point mass yields the sampled kernel") {
  PhaseGrid g;
  ScalarField delta(g);
  const int ic = g.n_x / 2, jc = g.n_p / 2;  // cell nearest the origin
  delta.at(ic, jc) = 1.0 / g.cell_area();    // unit integrated mass

  const ScalarField s = coarse_grain(delta);

  // kernel exp(-(xi^2+eta^2)) has per-axis variance 1/2; the response is the
  // grid-sampled kernel centered on the source cell, normalized to unit
  // discrete mass
  const double x0 = g.x(ic), p0 = g.p(jc);
  ScalarField oracle = make_scalar(g, [&](double x, double p) {
    return std::exp(-((x - x0) * (x - x0) + (p - p0) * (p - p0)));
  });
  double z = 0.0;
  for (double v : oracle.v) z += v;
  for (double& v : oracle.v) v /= z * g.cell_area();

  REQUIRE(max_diff(s, oracle) <= 1e-12);
  REQUIRE(std::abs(integrate(s) - 1.0) <= 1e-10);
}

TEST_CASE("smoothing adds half a unit of variance per axis") {
  PhaseGrid g;
  const ScalarField f = make_scalar(g, [](double x, double p) { return gauss2(x, p, 1.0); });
  const ScalarField s = coarse_grain(f);
  const ScalarField oracle =
      make_scalar(g, [](double x, double p) { return gauss2(x, p, 1.5); });

  // The convolution identity is exact up to edge effects: truncating and
  // renormalizing the kernel at the boundary feeds ~1e-12 absolute into
  // tail cells, decaying inward. A wrong kernel variance would miss these
  // bounds by eight orders of magnitude.
  double inner = 0.0;
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j)
      if (std::max(std::abs(g.x(i)), std::abs(g.p(j))) <= 4.0)
        inner = std::max(inner, std::abs(s.at(i, j) - oracle.at(i, j)));
  REQUIRE(inner <= 5e-12);
  REQUIRE(max_diff(s, oracle) <= 1e-10);
  REQUIRE(std::abs(integrate(s) - integrate(f)) <= 1e-10);
}

TEST_CASE("smoothing is linear") {
  PhaseGrid g;
  Mat<2> m1 = (Mat<2>() << 1.0, cplx(0.3, 0.1), cplx(0.3, -0.1), 0.5).finished();
  const MatrixField<2> f = make_matrix(
      g, [](double x, double p) { return gauss2(x, p, 1.0); }, m1);
  const MatrixField<2> h = make_matrix(
      g, [](double x, double p) { return gauss2(x - 1.0, p + 2.0, 2.0); }, SIGMA1);

  const MatrixField<2> lhs = coarse_grain(lin(0.7, f, -1.3, h));
  const MatrixField<2> rhs = lin(0.7, coarse_grain(f), -1.3, coarse_grain(h));
  REQUIRE(max_diff(lhs, rhs) <= 1e-12);
}

TEST_CASE("smoothing preserves the integrated trace and hermiticity") {
  PhaseGrid g;
  Mat<2> rho = (Mat<2>() << 0.7, cplx(0.2, -0.1), cplx(0.2, 0.1), 0.3).finished();
  const MatrixField<2> f = make_matrix(
      g, [](double x, double p) { return gauss2(x, p, 1.0); }, rho);
  REQUIRE(f.hermitian);

  const MatrixField<2> s = coarse_grain(f);
  const Mat<2> before = integrate(f), after = integrate(s);
  REQUIRE(std::abs((before - after).trace()) <= 1e-10);
  REQUIRE(s.hermitian);
  REQUIRE(s.hermiticity_defect() <= 1e-12);
}

TEST_CASE("hermiticity flag survives differentiation") {
  PhaseGrid g;
  Mat<2> rho = (Mat<2>() << 0.7, cplx(0.2, -0.1), cplx(0.2, 0.1), 0.3).finished();
  const MatrixField<2> f = make_matrix(
      g, [](double x, double p) { return gauss2(x, p, 1.0); }, rho);
  const MatrixField<2> d = partial_x(f);
  REQUIRE(d.hermitian);
  REQUIRE(d.hermiticity_defect() <= 1e-12);
}

TEST_CASE("underresolved grid is rejected by the smoother") {
  PhaseGrid g;
  g.n_x = 8;
  g.n_p = 8;  // dx = dp = 2, coarser than the unit-cell kernel
  const ScalarField f(g);
  REQUIRE_THROWS_AS(coarse_grain(f), KernelUnderresolved);
}

TEST_CASE("quadrature matches closed forms") {
  PhaseGrid g;
  const ScalarField f = make_scalar(g, [](double x, double p) { return gauss2(x, p, 1.0); });
  REQUIRE(std::abs(integrate(f) - 1.0) <= 1e-10);

  Mat<2> rho = (Mat<2>() << 0.7, cplx(0.2, -0.1), cplx(0.2, 0.1), 0.3).finished();
  const MatrixField<2> prod = make_matrix(
      g, [](double x, double p) { return gauss2(x, p, 1.0); }, rho);
  const Mat<2> q = integrate(prod);
  REQUIRE((q - rho).cwiseAbs().maxCoeff() <= 1e-10);

  const ScalarField u = make_scalar(g, [](double, double) { return 0.3; });
  REQUIRE(std::abs(integrate(u) - 0.3 * 256.0) <= 1e-10);
}

TEST_CASE("smoothed product state is admissible, point mass is not") {
  PhaseGrid g;
  Mat<2> rho = (Mat<2>() << 0.7, cplx(0.2, -0.1), cplx(0.2, 0.1), 0.3).finished();
  const MatrixField<2> raw = make_matrix(
      g, [](double x, double p) { return gauss2(x, p, 1.0); }, rho);
  const MatrixField<2> f = coarse_grain(raw);

  // one more smoothing pass scales the peak by 3/4 (variance 1.5 -> 2.0),
  // so the distance sits at 1 - 3/4 = 1/4 up to cell-offset corrections
  const Admissibility a = admissibility_check(f, 0.5);
  REQUIRE(a.admissible);
  REQUIRE(a.distance > 0.2);
  REQUIRE(a.distance < 0.3);
  REQUIRE_FALSE(admissibility_check(f, 0.1).admissible);

  MatrixField<2> delta(g);
  delta.at(g.n_x / 2, g.n_p / 2) = rho / g.cell_area();
  const Admissibility d = admissibility_check(delta, 0.5);
  REQUIRE_FALSE(d.admissible);
  REQUIRE(d.distance > 0.9);

  // repeated smoothing moves a Gaussian less and less
  const Admissibility a2 = admissibility_check(coarse_grain(f), 0.5);
  REQUIRE(a2.distance <= a.distance);
}

TEST_CASE("operations on mismatched grids are rejected") {
  PhaseGrid g;
  PhaseGrid g2 = g;
  g2.n_x = 64;
  const ScalarField a(g), b(g2);
  REQUIRE_THROWS_AS(poisson_bracket(a, b), GridMismatch);
  ScalarField y(g);
  REQUIRE_THROWS_AS(axpy(y, 1.0, b), GridMismatch);
}

TEST_CASE("spectral derivative is available as an optimization") {
  PhaseGrid g;
  const ScalarField f =
      make_scalar(g, [](double x, double p) { return std::exp(-(x * x + p * p) / 2.0); });
  const ScalarField d = partial_x(f, Deriv::spectral);
  double err = 0.0;
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j)
      err = std::max(err,
                     std::abs(d.at(i, j) + g.x(i) * std::exp(-(g.x(i) * g.x(i) +
                                                               g.p(j) * g.p(j)) /
                                                              2.0)));
  REQUIRE(err <= 1e-9);  // limited by the periodic images at |x| = 16

  PhaseGrid bad = g;
  bad.n_x = 96;
  const ScalarField fb(bad);
  REQUIRE_THROWS_AS(partial_x(fb, Deriv::spectral), ValidationError);
}

TEST_CASE("csv export is row-major with a fixed header") {
  PhaseGrid g;
  g.n_x = 8;
  g.n_p = 8;
  ScalarField f(g);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) f.at(i, j) = 100.0 * i + j;
  f.at(0, 0) = 0.125;

  const auto path = std::filesystem::temp_directory_path() / "hybridyn_csv_test.csv";
  write_scalar_field_csv(path, f);

  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  REQUIRE(line == "x,p,value");
  std::getline(is, line);
  REQUIRE(line == "-7,-7,0.125");  // x(0), p(0)
  std::getline(is, line);
  REQUIRE(line == "-7,-5,1");  // p varies fastest
  int rows = 2;
  while (std::getline(is, line)) {
    ++rows;
    if (rows == 9) REQUIRE(line == "-5,-7,100");  // second x row starts
  }
  REQUIRE(rows == 64);
  std::filesystem::remove(path);

  REQUIRE_THROWS_AS(
      write_scalar_field_csv("/nonexistent_dir_zz/out.csv", f), IoError);
}
