#include "echoloc/echometric.hpp"

#include <algorithm>
#include <cmath>

#include "echoloc/error.hpp"
#include "echoloc/io.hpp"

namespace echoloc {

TimeNorm parse_time_norm(const std::string& name) {
  if (name == "l1" || name == "L1") return TimeNorm::l1;
  if (name == "l2" || name == "L2") return TimeNorm::l2;
  throw ValidationError("unknown time norm '" + name + "'");
}

std::string to_string(TimeNorm norm) { return norm == TimeNorm::l1 ? "l1" : "l2"; }

void NormSpec::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be >= 0");
}

SynthesisRule parse_synthesis_rule(const std::string& name) {
  if (name == "min") return SynthesisRule::min;
  if (name == "mean") return SynthesisRule::mean;
  throw ValidationError("unknown synthesis rule '" + name + "'");
}

std::string to_string(SynthesisRule rule) { return rule == SynthesisRule::min ? "min" : "mean"; }

void DistanceMatrix::validate() const {
  if (d.rows() != d.cols()) throw ValidationError("distance matrix must be square");
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw ValidationError("distance matrix must have zero diagonal");
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      if (d(i, j) != d(j, i)) throw ValidationError("distance matrix must be symmetric");
      if (!(d(i, j) >= 0.0) || !std::isfinite(d(i, j)))
        throw ValidationError("distances must be finite and non-negative");
    }
  }
}

namespace {

// Pairwise time-norm distances between the columns of a (M x n) series.
// Columns are contiguous, so each pair is a weighted reduction over M values.
Matrix pairwise_time_norm(const Matrix& re, const Matrix* im, const Vector& weights, TimeNorm norm,
                          double exponent) {
  const Eigen::Index n = re.cols();
  Matrix out = Matrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s;
      if (im) {
        const auto mod2 = (re.col(i) - re.col(j)).array().square() + (im->col(i) - im->col(j)).array().square();
        s = norm == TimeNorm::l1 ? (mod2.sqrt() * weights.array()).sum()
                                 : std::sqrt((mod2 * weights.array()).sum());
      } else {
        const auto diff = (re.col(i) - re.col(j)).array();
        s = norm == TimeNorm::l1 ? (diff.abs() * weights.array()).sum()
                                 : std::sqrt((diff.square() * weights.array()).sum());
      }
      out(i, j) = exponent == 1.0 ? s : std::pow(s, exponent);
    }
  }
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

Matrix series_distance(const ComplexMatrix& series, bool real, const Vector& weights, TimeNorm norm,
                       double exponent) {
  const Matrix re = series.real();
  if (real) return pairwise_time_norm(re, nullptr, weights, norm, exponent);
  const Matrix im = series.imag();
  return pairwise_time_norm(re, &im, weights, norm, exponent);
}

}  // namespace

DistanceMatrix per_source_distance(const WaveField& field, const NormSpec& norms, const TimeGrid& grid) {
  norms.validate();
  if (field.samples() != grid.samples() || field.ut.rows() != field.u.rows() ||
      field.ut.cols() != field.u.cols())
    throw ValidationError("wave field does not match the time grid");
  const Vector weights = grid.trapezoid_weights();
  const bool real = field.is_real();
  DistanceMatrix out;
  out.d = series_distance(field.u, real, weights, norms.x_norm, norms.alpha);
  if (norms.uses_derivative())
    out.d += series_distance(field.ut, real, weights, *norms.y_norm, norms.beta);
  return out;
}

void Synthesizer::add(const DistanceMatrix& d) {
  if (count_ == 0) {
    acc_ = d.d;
  } else {
    if (d.d.rows() != acc_.rows() || d.d.cols() != acc_.cols())
      throw ValidationError("distance matrices have inconsistent sizes");
    if (rule_ == SynthesisRule::min) acc_ = acc_.cwiseMin(d.d);
    else acc_ += d.d;
  }
  ++count_;
}

DistanceMatrix Synthesizer::result() const {
  if (count_ == 0) throw ValidationError("cannot synthesize an empty list of distances");
  DistanceMatrix out;
  out.d = rule_ == SynthesisRule::mean ? Matrix(acc_ / static_cast<double>(count_)) : acc_;
  return out;
}

DistanceMatrix synthesize(std::span<const DistanceMatrix> distances, SynthesisRule rule) {
  Synthesizer s(rule);
  for (const auto& d : distances) s.add(d);
  return s.result();
}

double spectral_distance(const EigenBasis& basis, std::size_t x0, std::size_t y0) {
  const std::size_t n = basis.vertices();
  if (x0 >= n || y0 >= n) throw ValidationError("vertex out of range");
  const auto modes = static_cast<Eigen::Index>(basis.size());
  if (modes < 2) return 0.0;
  const auto a = static_cast<Eigen::Index>(x0);
  const auto b = static_cast<Eigen::Index>(y0);
  return (basis.phi.row(a).tail(modes - 1) - basis.phi.row(b).tail(modes - 1)).norm();
}

DistanceMatrix spectral_distance_matrix(const EigenBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.vertices());
  const auto modes = static_cast<Eigen::Index>(basis.size());
  DistanceMatrix out;
  out.d = Matrix::Zero(n, n);
  if (modes < 2) return out;
  const Matrix coords = basis.phi.rightCols(modes - 1).transpose();  // (N-1) x n
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) {
      out.d(i, j) = (coords.col(i) - coords.col(j)).norm();
      out.d(j, i) = out.d(i, j);
    }
  return out;
}

double time_averaged_distance(const EigenBasis& basis, std::size_t x0, std::size_t y0, double horizon,
                              std::size_t samples) {
  const std::size_t n = basis.vertices();
  if (x0 >= n || y0 >= n) throw ValidationError("vertex out of range");
  if (x0 == y0) return 0.0;
  const TimeGrid grid(horizon, samples);
  const Vector weights = grid.trapezoid_weights();

  // Dirac data normalized so that <delta_z, phi_k> = phi_k(z) under the basis measure.
  InitialDatum a = dirac_datum(n, x0);
  InitialDatum b = dirac_datum(n, y0);
  if (!basis.counting_measure()) {
    a.values /= basis.measure(static_cast<Eigen::Index>(x0));
    b.values /= basis.measure(static_cast<Eigen::Index>(y0));
  }
  Vector diff_coeff = basis.project(a.values) - basis.project(b.values);
  diff_coeff(0) = 0.0;

  const Symbol wave = Symbol::wave(0.0);
  const auto modes = static_cast<Eigen::Index>(basis.size());
  Vector amp(modes);
  double integral = 0.0;
  for (std::size_t m = 0; m < samples; ++m) {
    const double t = grid.time(m);
    for (Eigen::Index k = 0; k < modes; ++k) amp(k) = wave.amplitude(basis.lambda(k), t).real() * diff_coeff(k);
    const Vector u = basis.phi * amp;  // u_x0(t, .) - u_y0(t, .)
    const double energy = basis.counting_measure() ? u.squaredNorm()
                                                   : (u.array().square() * basis.measure.array()).sum();
    integral += weights(static_cast<Eigen::Index>(m)) * energy;
  }
  return integral / horizon;
}

TheoremCheck verify_theorem(const EigenBasis& basis, std::size_t x0, std::size_t y0, double horizon,
                            std::size_t samples) {
  if (x0 >= basis.vertices() || y0 >= basis.vertices()) throw ValidationError("vertex out of range");
  if (x0 == y0) return {};
  spectral_gap(basis);
  TheoremCheck out;
  out.time_average = time_averaged_distance(basis, x0, y0, horizon, samples);
  const double dn = spectral_distance(basis, x0, y0);
  out.target = 0.5 * dn * dn;
  return out;
}

WeightedGraph AffinityFromDistance::to_graph() const {
  Matrix m = w;
  m.diagonal().setZero();
  return WeightedGraph(std::move(m), true);
}

AffinityFromDistance affinity_from_distance(const DistanceMatrix& d, double epsilon_w) {
  if (!(epsilon_w > 0.0) || !std::isfinite(epsilon_w)) throw ValidationError("epsilon_w must be > 0");
  AffinityFromDistance out;
  out.epsilon_w = epsilon_w;
  out.w = (-d.d.array().square() / epsilon_w).unaryExpr([](double x) { return std::exp(x); }).matrix();
  out.w.diagonal().setOnes();
  return out;
}

WeightedGraph threshold_graph(const AffinityFromDistance& w, double factor, bool include_diagonal) {
  if (!(factor > 0.0)) throw ValidationError("threshold factor must be > 0");
  const Eigen::Index n = w.w.rows();
  double mean;
  if (include_diagonal) {
    mean = w.w.mean();
  } else {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j + 1; i < n; ++i) sum += w.w(i, j);
    mean = n > 1 ? sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1)) : 0.0;
  }
  const double cut = factor * mean;
  Matrix adj = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i)
      if (w.w(i, j) > cut) {
        adj(i, j) = 1.0;
        adj(j, i) = 1.0;
      }
  return WeightedGraph(std::move(adj), true);
}

void save_matrix_binary(const std::filesystem::path& path, const Matrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("binary matrix format expects a square matrix");
  BinaryWriter out(path);
  out.write_i64(m.rows());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write_doubles(std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
  out.close();
}

Matrix load_matrix_binary(const std::filesystem::path& path) {
  BinaryReader in(path);
  const std::int64_t n = in.read_i64();
  if (n < 0) throw ValidationError("corrupt matrix file " + path.string());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(n, n);
  in.read_doubles(std::span<double>(rm.data(), static_cast<std::size_t>(rm.size())));
  return rm;
}

}  // namespace echoloc
