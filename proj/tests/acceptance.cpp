// Acceptance criteria. One line per criterion; exit status 1 if any fails.
//
// Criterion 7 needs the SNAP Facebook files: set ECHOLOC_SNAP_DIR to a
// directory holding facebook_combined.txt and the *.circles files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "echoloc/datasets.hpp"
#include "echoloc/embed.hpp"
#include "echoloc/pipeline.hpp"
#include "echoloc/rng.hpp"
#include "oracles.hpp"

using namespace echoloc;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, const std::ostringstream& detail) {
  return {ok ? Status::pass : Status::fail, detail.str()};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WeightedGraph to_graph(const oracle::Mat& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Matrix w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) w(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return WeightedGraph(w);
}

WeightedGraph random_small_graph(std::uint64_t seed) {
  const auto a = oracle::connected_erdos_renyi(10, 0.4, seed);
  Rng rng(split_seed(seed, "weights"));
  std::uniform_real_distribution<double> u(0.2, 1.5);
  Matrix w = Matrix::Zero(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j)
      if (a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0.0) w(i, j) = w(j, i) = u(rng);
  return WeightedGraph(w);
}

double median_off_diagonal(const Matrix& d) {
  std::vector<double> v;
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = j + 1; i < d.rows(); ++i) v.push_back(d(i, j));
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

double median_of(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? static_cast<double>(v[n / 2]) : 0.5 * static_cast<double>(v[n / 2 - 1] + v[n / 2]);
}

constexpr double kTheoremTolerance = 0.005;

// ---- 1 ---------------------------------------------------------------------

Outcome theorem_reproduction() {
  std::ostringstream out;
  bool ok = true;

  auto t0 = std::chrono::steady_clock::now();
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  const EigenBasis pair = compute_basis(WeightedGraph(w), LaplacianVariant::unnormalized, 2);
  const TheoremCheck c = verify_theorem(pair, 0, 1, 1000.0 / spectral_gap(pair), 100000);
  const double pair_dev = std::abs(c.time_average - 1.0);
  const double pair_time = seconds_since(t0);
  ok = ok && std::abs(c.target - 1.0) < 1e-12 && pair_dev <= kTheoremTolerance && pair_time < 1.0;
  out << "2-vertex time_average=" << c.time_average << " (" << pair_time << " s)";

  t0 = std::chrono::steady_clock::now();
  double dev_short = 0.0, dev_long = 0.0, worst_ratio_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const EigenBasis b = compute_basis(to_graph(oracle::connected_erdos_renyi(30, 0.2, seed)),
                                       LaplacianVariant::symmetric, 30);
    const double l1 = spectral_gap(b);
    Rng rng(split_seed(seed, "pair"));
    std::uniform_int_distribution<std::size_t> pick(0, 29);
    std::size_t x = pick(rng), y = pick(rng);
    while (y == x) y = pick(rng);
    // same time resolution at both horizons
    const TheoremCheck short_run = verify_theorem(b, x, y, 2000.0 / l1, 100000);
    const TheoremCheck long_run = verify_theorem(b, x, y, 8000.0 / l1, 400000);
    worst_ratio_gap = std::max(worst_ratio_gap, std::abs(short_run.ratio() - 1.0));
    dev_short += std::abs(short_run.ratio() - 1.0) / 20.0;
    dev_long += std::abs(long_run.ratio() - 1.0) / 20.0;
  }
  const double er_time = seconds_since(t0);
  const double shrink = dev_long > 0.0 ? dev_short / dev_long : INFINITY;
  ok = ok && worst_ratio_gap <= 0.05 && shrink >= 2.0 && er_time < 30.0;
  out << "; ER max |ratio-1|=" << worst_ratio_gap << " mean deviation " << dev_short << " -> " << dev_long
      << " (shrink " << shrink << "x, " << er_time << " s)";
  return verdict(ok, out);
}

// ---- 2 ---------------------------------------------------------------------

Outcome disconnected_bound() {
  Matrix w = Matrix::Zero(6, 6);
  for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}) w(a, b) = w(b, a) = 1.0;
  const EigenBasis b = compute_basis(WeightedGraph(w), LaplacianVariant::unnormalized, 6);
  const std::size_t zeros = zero_multiplicity(b);
  const double horizon = 1000.0 / b.lambda(static_cast<Eigen::Index>(zeros));
  bool ok = zeros == 2;
  double lo_margin = INFINITY, hi_margin = INFINITY;
  for (std::size_t x = 0; x < 6; ++x)
    for (std::size_t y = x + 1; y < 6; ++y) {
      const double avg = time_averaged_distance(b, x, y, horizon, 100000);
      const double d2 = std::pow(spectral_distance(b, x, y), 2);
      lo_margin = std::min(lo_margin, avg / (0.5 * d2) - 1.0);
      hi_margin = std::min(hi_margin, 1.0 - avg / d2);
      ok = ok && avg >= 0.5 * d2 * (1.0 - kTheoremTolerance) && avg <= d2 * (1.0 + kTheoremTolerance);
    }
  std::ostringstream out;
  out << "zero multiplicity " << zeros << ", 15 pairs, min relative margin below/above " << lo_margin << " / "
      << hi_margin;
  return verdict(ok, out);
}

// ---- 3 ---------------------------------------------------------------------

struct DiskScores {
  double raw, refined, seconds;
};

DiskScores two_disks_scores(std::size_t n_per) {
  const auto t0 = std::chrono::steady_clock::now();
  TwoDisksParams p;
  p.n_per = n_per;
  const TwoDisks d = gen_two_disks(p);
  EchoConfig cfg;
  cfg.rule = SynthesisRule::mean;
  const EigenBasis basis = compute_basis(d.graph, cfg.variant, cfg.n_eigs);
  const std::uint64_t km_seed = split_seed(cfg.seed, "kmeans");
  const double raw = clustering_accuracy(eigenmap(basis, 1), d.cloud.labels, 2, km_seed);
  const EchoResult r = run_echolocation(d.graph, cfg, basis);
  const double refined = clustering_accuracy(refined_embedding(r.distance, 1), d.cloud.labels, 2, km_seed);
  return {raw, refined, seconds_since(t0)};
}

Outcome two_disks_clustering() {
  const DiskScores small = two_disks_scores(200);
  const DiskScores full = two_disks_scores(1000);
  const bool small_ok = small.refined >= 0.90 && small.refined >= small.raw && small.seconds < 20.0;
  const bool full_ok = full.refined >= 0.90 && full.refined >= full.raw && full.seconds < 300.0;
  std::ostringstream out;
  out << "200+200 refined=" << small.refined << " raw=" << small.raw << " (" << small.seconds << " s); "
      << "1000+1000 refined=" << full.refined << " raw=" << full.raw << " (" << full.seconds << " s)";
  return verdict(small_ok && full_ok, out);
}

// ---- 4 ---------------------------------------------------------------------

Outcome dumbbell_heat() {
  const auto t0 = std::chrono::steady_clock::now();
  DumbbellParams p;
  p.n = 1500;
  const PointCloud cloud = gen_dumbbell(p);
  const WeightedGraph g = build_affinity(cloud, AffinityConfig::defaults_for(cloud.size(), 0.05));
  EchoConfig cfg;
  cfg.symbol = "heat";
  cfg.rule = SynthesisRule::mean;
  const EigenBasis basis = compute_basis(g, cfg.variant, cfg.n_eigs);
  const Vector raw = eigenmap(basis, 1).coords.col(0);
  const EchoResult r = run_echolocation(g, cfg, basis);
  const Vector refined = refined_embedding(r.distance, 1).coords.col(0);

  const double raw_step = step_fit_score(raw, cloud), refined_step = step_fit_score(refined, cloud);
  const BoxVariance raw_var = within_box_variance(raw, cloud), refined_var = within_box_variance(refined, cloud);
  const double elapsed = seconds_since(t0);
  const bool ok = refined_step <= raw_step && refined_var.left <= raw_var.left &&
                  refined_var.right <= raw_var.right && elapsed < 60.0;
  std::ostringstream out;
  out << "step refined=" << refined_step << " raw=" << raw_step << "; box variance refined=(" << refined_var.left
      << ", " << refined_var.right << ") raw=(" << raw_var.left << ", " << raw_var.right << ") (" << elapsed
      << " s)";
  return verdict(ok, out);
}

// ---- 5 ---------------------------------------------------------------------

Outcome numerical_hygiene() {
  double residual = 0.0, ortho = 0.0;
  auto track = [&](const Matrix& lap, const EigenBasis& b) {
    const BasisDiagnostics d = diagnose(lap, b);
    residual = std::max(residual, d.max_residual);
    ortho = std::max(ortho, d.max_orthogonality);
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WeightedGraph g = to_graph(oracle::connected_erdos_renyi(30, 0.2, seed));
    for (LaplacianVariant v : {LaplacianVariant::unnormalized, LaplacianVariant::symmetric,
                               LaplacianVariant::random_walk})
      track(laplacian(g, v), compute_basis(g, v, 30));
  }
  {
    // above the dense limit: sparse kNN graph through the Krylov solver
    PlaneHolesParams p;
    p.n = 3500;
    p.holes = default_holes();
    const WeightedGraph g = build_affinity(gen_plane_with_holes(p), AffinityConfig::defaults_for(3500, 0.002));
    track(laplacian(g, LaplacianVariant::symmetric), compute_basis(g, LaplacianVariant::symmetric, 50));
  }

  double energy = 0.0, fd = 0.0;
  bool heat_monotone = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WeightedGraph g = random_small_graph(seed);
    const EigenBasis b = compute_basis(g, LaplacianVariant::symmetric, 10);
    const InitialDatum f = initial_datum(g, 0);
    const Vector c = b.project(f.values);

    const WaveField s = propagate(b, f, Symbol::schrodinger(), TimeGrid(20.0, 400));
    for (Eigen::Index m = 0; m < s.u.rows(); ++m) {
      const Eigen::VectorXcd coeff = b.phi.transpose().cast<Complex>() * s.u.row(m).transpose();
      energy = std::max(energy, std::abs(coeff.squaredNorm() - c.squaredNorm()) / c.squaredNorm());
    }

    const WaveField h = propagate(b, f, Symbol::heat(), TimeGrid(20.0, 400));
    const Vector mean_part = c(0) * b.phi.col(0);
    double prev = INFINITY;
    for (Eigen::Index m = 0; m < h.u.rows(); ++m) {
      const double dev = (h.u.row(m).transpose().real() - mean_part).cwiseAbs().maxCoeff();
      heat_monotone = heat_monotone && dev <= prev + 1e-15;
      prev = dev;
    }

    const double horizon = 1.0 / spectral_gap(b);
    const TimeGrid grid(horizon, 1000);
    for (const Symbol& sym : {Symbol::wave(horizon), Symbol::heat(), Symbol::airy(), Symbol::schrodinger()}) {
      const WaveField w = propagate(b, f, sym, grid);
      for (Eigen::Index m = 1; m + 1 < w.u.rows(); ++m) {
        const Eigen::RowVectorXcd diff = (w.u.row(m + 1) - w.u.row(m - 1)) / (2.0 * grid.step());
        const double scale = std::max(w.ut.row(m).cwiseAbs().maxCoeff(), 1e-3);
        fd = std::max(fd, (diff - w.ut.row(m)).cwiseAbs().maxCoeff() / scale);
      }
    }
  }
  const bool ok = residual <= 1e-8 && ortho <= 1e-10 && energy <= 1e-10 && heat_monotone && fd <= 1e-3;
  std::ostringstream out;
  out << "residual=" << residual << " orthonormality=" << ortho << " schrodinger_energy=" << energy
      << " heat_monotone=" << (heat_monotone ? "yes" : "no") << " fd=" << fd;
  return verdict(ok, out);
}

// ---- 6 ---------------------------------------------------------------------

double bridge_to_sphere(const Matrix& d, const std::vector<int>& labels) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (labels[i] == 2 && labels[j] != 2) {
        sum += d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        ++count;
      }
  return sum / static_cast<double>(count);
}

Outcome sphere_bridge() {
  const auto t0 = std::chrono::steady_clock::now();
  const PointCloud cloud = gen_spheres_bridge(SpheresBridgeParams{});
  const WeightedGraph g = build_affinity(cloud, AffinityConfig::defaults_for(cloud.size(), 0.3));
  EchoConfig cfg;
  cfg.rule = SynthesisRule::min;
  const EigenBasis basis = compute_basis(g, cfg.variant, cfg.n_eigs);
  const Matrix refined = run_echolocation(g, cfg, basis).distance.d;
  const Matrix raw = spectral_distance_matrix(basis).d;
  const double a = bridge_to_sphere(refined, cloud.labels) / median_off_diagonal(refined);
  const double b = bridge_to_sphere(raw, cloud.labels) / median_off_diagonal(raw);
  const double elapsed = seconds_since(t0);
  std::ostringstream out;
  out << "normalized bridge-to-sphere refined=" << a << " raw=" << b << " (" << elapsed << " s)";
  return verdict(a > b && elapsed < 120.0, out);
}

// ---- 7 ---------------------------------------------------------------------

Outcome facebook_circles() {
  const char* dir = std::getenv("ECHOLOC_SNAP_DIR");
  if (!dir || !*dir) return {Status::skip, "ECHOLOC_SNAP_DIR not set"};
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root(dir);
  std::vector<fs::path> circle_files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.path().extension() == ".circles") circle_files.push_back(entry.path());
  std::sort(circle_files.begin(), circle_files.end());
  const SnapNetwork net = load_snap_circles(root / "facebook_combined.txt", circle_files);

  EchoConfig cfg;
  cfg.rule = SynthesisRule::mean;
  const EchoResult r = run_echolocation(net.graph, cfg);
  const WeightedGraph wave = threshold_graph(affinity_from_distance(r.distance, 1.0), 10.0);
  const double original = median_of(circle_edge_counts(net.graph, net.circles, 100));
  const double echoed = median_of(circle_edge_counts(wave, net.circles, 100));
  const double elapsed = seconds_since(t0);
  std::ostringstream out;
  out << "n=" << net.graph.size() << " circles=" << net.circles.size() << " median induced edges wave=" << echoed
      << " original=" << original << " (" << elapsed << " s)";
  return verdict(echoed >= original && elapsed < 600.0, out);
}

// ---- 8 ---------------------------------------------------------------------

Outcome determinism() {
  TwoDisksParams p;
  p.n_per = 200;
  const fs::path dir = fs::temp_directory_path() / "echoloc_acceptance";
  fs::create_directories(dir);
  bool ok = true;
  std::ostringstream out;
  for (EigenMethod method : {EigenMethod::dense, EigenMethod::krylov}) {
    EchoConfig cfg;
    cfg.rule = SynthesisRule::mean;
    cfg.eigen.method = method;
    std::uint64_t hashes[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path file = dir / ("run" + std::to_string(run) + ".bin");
      save_matrix_binary(file, run_echolocation(gen_two_disks(p).graph, cfg).distance.d);
      hashes[run] = hash_file(file);
    }
    ok = ok && hashes[0] == hashes[1];
    out << (method == EigenMethod::dense ? "dense " : "; krylov ") << hex64(hashes[0]) << " vs "
        << hex64(hashes[1]);
  }
  fs::remove_all(dir);
  return verdict(ok, out);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 theorem reproduction", theorem_reproduction},
      {"2 disconnected bound", disconnected_bound},
      {"3 two-disks clustering", two_disks_clustering},
      {"4 dumbbell refined heat", dumbbell_heat},
      {"5 numerical hygiene", numerical_hygiene},
      {"6 sphere-bridge gap", sphere_bridge},
      {"7 facebook circles", facebook_circles},
      {"8 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    if (o.status == Status::fail) ++failures;
    std::cout << tag << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << failures << " failed" << std::endl;
  return failures ? 1 : 0;
}
