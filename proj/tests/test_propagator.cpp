#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "echoloc/datasets.hpp"
#include "echoloc/error.hpp"
#include "echoloc/propagator.hpp"
#include "oracles.hpp"

using namespace echoloc;

namespace {

WeightedGraph unit_pair() {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  return WeightedGraph(w);
}

// Connected 10-vertex graph with random positive weights.
WeightedGraph random_small_graph(std::uint64_t seed) {
  const auto a = oracle::connected_erdos_renyi(10, 0.4, seed);
  std::mt19937_64 rng(seed * 7 + 1);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  Matrix w = Matrix::Zero(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j)
      if (a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0.0) w(i, j) = w(j, i) = u(rng);
  return WeightedGraph(w);
}

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g(3.7, 11);
  CHECK(g.time(0) == 0.0);
  CHECK(g.time(10) == 3.7);
  CHECK(g.time(5) == doctest::Approx(1.85).epsilon(1e-15));
  const Vector w = g.trapezoid_weights();
  CHECK(w.sum() == doctest::Approx(3.7).epsilon(1e-14));
  CHECK(w(0) == doctest::Approx(0.5 * g.step()));
  CHECK_THROWS_AS(TimeGrid(1.0, 1), ValidationError);
  CHECK_THROWS_AS(TimeGrid(0.0, 10), ValidationError);
}

TEST_CASE("symbols") {
  CHECK(Symbol::heat().p(2.0) == Complex(-4.0, 0.0));
  CHECK(Symbol::airy().p(2.0) == Complex(0.0, 8.0));
  CHECK(Symbol::schrodinger().p(2.0) == Complex(0.0, 2.0));
  for (const Symbol& s : {Symbol::heat(), Symbol::airy(), Symbol::schrodinger()}) CHECK(s.p(0.0).real() <= 0.0);
  CHECK(Symbol::parse("wave", 0.3).attenuation() == 0.3);
  CHECK(Symbol::parse("heat", 0.0).kind() == Symbol::Kind::first_order);
  CHECK_THROWS_AS(Symbol::parse("laplace", 0.0), ValidationError);
  CHECK_THROWS_AS(Symbol::wave(-0.1), ValidationError);

  SUBCASE("attenuation never increases a mode amplitude") {
    for (double lambda : {0.3, 1.0, 2.5})
      for (double t : {0.1, 1.0, 4.0}) {
        double prev = std::abs(Symbol::wave(0.0).amplitude(lambda, t));
        for (double eps : {0.1, 0.5, 1.0, 3.0}) {
          const double a = std::abs(Symbol::wave(eps).amplitude(lambda, t));
          CHECK(a <= prev);
          prev = a;
        }
      }
  }
}

TEST_CASE("initial data") {
  SUBCASE("self weight") {
    const auto f = initial_datum(unit_pair(), 0);
    CHECK(f.values(0) == 1.0);
    CHECK(f.values(1) == 1.0);
    DatumOptions o;
    o.zero_self_weight = true;
    CHECK(initial_datum(unit_pair(), 0, o).values(0) == 0.0);
  }
  SUBCASE("single neighbour") {
    Matrix w = Matrix::Zero(3, 3);
    w(0, 1) = w(1, 0) = 0.3;
    w(1, 2) = w(2, 1) = 0.8;
    DatumOptions o;
    o.zero_self_weight = true;
    const auto f = initial_datum(WeightedGraph(w), 0, o);
    CHECK((f.values.array() != 0.0).count() == 1);
    CHECK(f.values(1) == 0.3);
  }
  SUBCASE("isolated source") {
    Matrix w = Matrix::Zero(3, 3);
    w(0, 1) = w(1, 0) = 1.0;
    CHECK_THROWS_WITH(initial_datum(WeightedGraph(w, true), 2), doctest::Contains("isolated source"));
    CHECK_THROWS_AS(initial_datum(unit_pair(), 2), ValidationError);
  }
  SUBCASE("disk data lies in [0, 1]") {
    TwoDisksParams p;
    p.n_per = 60;
    p.cross_rate = 0.0;
    p.epsilon = 0.2;
    const TwoDisks d = gen_two_disks(p);
    for (std::size_t v : {0u, 17u, 90u}) {
      const auto f = initial_datum(d.graph, v);
      CHECK(f.values.minCoeff() >= 0.0);
      CHECK(f.values.maxCoeff() <= 1.0);
    }
  }
  SUBCASE("dirac") {
    const auto f = dirac_datum(2, 0);
    CHECK(f.values(0) == 1.0);
    CHECK(f.values(1) == 0.0);
    const auto g = dirac_datum(9, 4);
    CHECK((g.values.array() != 0.0).count() == 1);
    CHECK(g.values(4) == 1.0);
    CHECK_THROWS_AS(dirac_datum(3, 3), ValidationError);
  }
}

TEST_CASE("2-vertex wave closed form") {
  const EigenBasis b = compute_basis(unit_pair(), LaplacianVariant::unnormalized, 2);
  CHECK((b.project(dirac_datum(2, 0).values) - b.phi.row(0).transpose()).cwiseAbs().maxCoeff() <= 1e-15);
  const TimeGrid grid(10.0, 201);
  const WaveField f = propagate(b, dirac_datum(2, 0), Symbol::wave(0.0), grid);
  CHECK(f.is_real());
  const double r2 = std::sqrt(2.0);
  for (std::size_t m = 0; m < grid.samples(); ++m) {
    const double t = grid.time(m);
    const auto row = static_cast<Eigen::Index>(m);
    CHECK(f.u(row, 0).real() == doctest::Approx((1.0 + std::cos(r2 * t)) / 2.0).epsilon(1e-13).scale(1.0));
    CHECK(f.u(row, 1).real() == doctest::Approx((1.0 - std::cos(r2 * t)) / 2.0).epsilon(1e-13).scale(1.0));
    CHECK(f.ut(row, 0).real() == doctest::Approx(-r2 * std::sin(r2 * t) / 2.0).epsilon(1e-13).scale(1.0));
  }
  CHECK((f.ut.row(0).array() == Complex(0.0, 0.0)).all());
}

TEST_CASE("initial row is the projected datum") {
  const WeightedGraph g = random_small_graph(3);
  for (std::size_t n_eigs : {10u, 6u}) {
    const EigenBasis b = compute_basis(g, LaplacianVariant::symmetric, n_eigs);
    const InitialDatum f = initial_datum(g, 2);
    const Vector projected = b.phi * b.project(f.values);
    for (const Symbol& s : {Symbol::wave(0.7), Symbol::heat(), Symbol::airy()}) {
      const WaveField field = propagate(b, f, s, TimeGrid(1.0, 5));
      CHECK((field.u.row(0).transpose().real() - projected).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
  // full basis recovers the datum itself
  const EigenBasis full = compute_basis(g, LaplacianVariant::symmetric, 10);
  const WaveField field = propagate(full, initial_datum(g, 2), Symbol::heat(), TimeGrid(1.0, 3));
  CHECK((field.u.row(0).transpose().real() - initial_datum(g, 2).values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("time derivative matches centred differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WeightedGraph g = random_small_graph(seed);
    const EigenBasis b = compute_basis(g, LaplacianVariant::symmetric, 10);
    const double horizon = 1.0 / spectral_gap(b);
    const TimeGrid grid(horizon, 1000);
    for (const Symbol& s : {Symbol::wave(horizon), Symbol::wave(0.0), Symbol::heat(), Symbol::schrodinger()}) {
      const WaveField f = propagate(b, initial_datum(g, 0), s, grid);
      const double h = grid.step();
      double worst = 0.0;
      for (Eigen::Index m = 1; m + 1 < f.u.rows(); ++m) {
        const Eigen::RowVectorXcd fd = (f.u.row(m + 1) - f.u.row(m - 1)) / (2.0 * h);
        const double scale = std::max(f.ut.row(m).cwiseAbs().maxCoeff(), 1e-3);
        worst = std::max(worst, (fd - f.ut.row(m)).cwiseAbs().maxCoeff() / scale);
      }
      CHECK(worst < 1e-3);
    }
  }
}

TEST_CASE("conservation and decay") {
  const WeightedGraph g = random_small_graph(11);
  const EigenBasis b = compute_basis(g, LaplacianVariant::symmetric, 8);
  const InitialDatum f = initial_datum(g, 4);
  const Vector c = b.project(f.values);
  const TimeGrid grid(20.0, 400);

  SUBCASE("schrodinger keeps spectral energy") {
    const WaveField w = propagate(b, f, Symbol::schrodinger(), grid);
    CHECK_FALSE(w.is_real());
    for (Eigen::Index m = 0; m < w.u.rows(); ++m) {
      const Eigen::VectorXcd coeff = b.phi.transpose().cast<Complex>() * w.u.row(m).transpose();
      CHECK(std::abs(coeff.squaredNorm() - c.squaredNorm()) <= 1e-10 * c.squaredNorm());
    }
  }
  SUBCASE("heat approaches the mean component monotonically") {
    const WaveField w = propagate(b, f, Symbol::heat(), grid);
    const Vector mean_part = c(0) * b.phi.col(0);
    double prev = INFINITY;
    for (Eigen::Index m = 0; m < w.u.rows(); ++m) {
      const double dev = (w.u.row(m).transpose().real() - mean_part).cwiseAbs().maxCoeff();
      CHECK(dev <= prev + 1e-15);
      CHECK(dev <= std::exp(-b.mu(1) * grid.time(static_cast<std::size_t>(m))) * f.values.norm() + 1e-14);
      prev = dev;
    }
  }
  SUBCASE("undamped wave energy is bounded by the coefficient energy") {
    const WaveField w = propagate(b, dirac_datum(10, 4), Symbol::wave(0.0), grid);
    const double bound = b.project(dirac_datum(10, 4).values).squaredNorm();
    for (Eigen::Index m = 0; m < w.u.rows(); ++m) CHECK(w.u.row(m).squaredNorm() <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("constant mode and unstable symbols") {
  const WeightedGraph g = random_small_graph(2);
  const EigenBasis b = compute_basis(g, LaplacianVariant::symmetric, 10);
  PropagateOptions o;
  o.drop_constant_mode = true;
  const WaveField w = propagate(b, initial_datum(g, 1), Symbol::wave(0.5), TimeGrid(3.0, 30), o);
  for (Eigen::Index m = 0; m < w.u.rows(); ++m)
    CHECK(std::abs(w.u.row(m).dot(b.phi.col(0).cast<Complex>())) <= 1e-12);

  const Symbol backward = Symbol::custom("backward-heat", [](double l) { return Complex(l * l, 0.0); });
  CHECK_THROWS_WITH_AS(propagate(b, initial_datum(g, 1), backward, TimeGrid(100.0, 10)),
                       doctest::Contains("unstable symbol"), NumericalError);
  CHECK_NOTHROW(propagate(b, initial_datum(g, 1), backward, TimeGrid(0.5, 10)));
  CHECK_THROWS_AS(propagate(b, dirac_datum(11, 1), Symbol::heat(), TimeGrid(1.0, 10)), ValidationError);
}

TEST_CASE("field dump round trip") {
  const WeightedGraph g = random_small_graph(6);
  const EigenBasis b = compute_basis(g, LaplacianVariant::symmetric, 10);
  const auto path = std::filesystem::temp_directory_path() / "echoloc_field.bin";
  for (const Symbol& s : {Symbol::wave(0.2), Symbol::airy()}) {
    const WaveField w = propagate(b, initial_datum(g, 3), s, TimeGrid(2.0, 7));
    save_field(path, w);
    const std::uintmax_t values = 2ull * 7 * 10 * (w.is_real() ? 1 : 2);
    CHECK(std::filesystem::file_size(path) == 8 * (3 + values));
    const WaveField back = load_field(path);
    CHECK(back.u == w.u);
    CHECK(back.ut == w.ut);
  }
  std::filesystem::remove(path);
}
