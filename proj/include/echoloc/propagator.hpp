#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>

#include "echoloc/graph.hpp"
#include "echoloc/spectrum.hpp"

namespace echoloc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// The PDE being simulated, given per frequency lambda.
///
/// wave_attenuated: each mode evolves as cos(lambda t) exp(-eps lambda t).
/// first_order:     each mode evolves as exp(p(lambda) t).
class Symbol {
 public:
  enum class Kind { wave_attenuated, first_order };

  static Symbol wave(double attenuation);
  static Symbol heat();         // p = -lambda^2
  static Symbol airy();         // p = i lambda^3
  static Symbol schrodinger();  // p = i lambda
  static Symbol custom(std::string name, std::function<Complex(double)> p);

  /// Builtins by name: wave, heat, airy, schrodinger.
  static Symbol parse(const std::string& name, double attenuation);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double attenuation() const { return attenuation_; }
  /// Per-mode multiplier for first_order symbols.
  Complex p(double lambda) const { return p_(lambda); }

  /// Mode amplitude g(t) and its time derivative g'(t).
  Complex amplitude(double lambda, double t) const;
  Complex derivative(double lambda, double t) const;

 private:
  Kind kind_ = Kind::wave_attenuated;
  std::string name_ = "wave";
  double attenuation_ = 0.0;
  std::function<Complex(double)> p_;
};

/// Uniform samples t_m = m T / (M - 1), m = 0..M-1.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t samples);
  double horizon() const { return horizon_; }
  std::size_t samples() const { return samples_; }
  double step() const { return horizon_ / static_cast<double>(samples_ - 1); }
  double time(std::size_t m) const;
  /// Trapezoid quadrature weights on [0, T].
  Vector trapezoid_weights() const;

 private:
  double horizon_;
  std::size_t samples_;
};

struct InitialDatum {
  std::size_t source = 0;
  Vector values;
};

/// Time samples of one solution: row m of u holds u(t_m, .), row m of ut
/// holds the time derivative.
struct WaveField {
  std::size_t source = 0;
  ComplexMatrix u;   // M x n
  ComplexMatrix ut;  // M x n

  std::size_t samples() const { return static_cast<std::size_t>(u.rows()); }
  std::size_t vertices() const { return static_cast<std::size_t>(u.cols()); }
  /// True when every imaginary part is exactly zero.
  bool is_real() const;
};

struct DatumOptions {
  bool zero_self_weight = false;  // default: f(v) = 1 at the source itself
};

/// Mollified indicator f(x) = w(v, x), with f(v) = 1 unless zero_self_weight.
InitialDatum initial_datum(const WeightedGraph& graph, std::size_t v, const DatumOptions& options = {});

/// Standard basis vector e_v.
InitialDatum dirac_datum(std::size_t n, std::size_t v);

struct PropagateOptions {
  bool drop_constant_mode = false;  // exclude mode 0 from the expansion
};

/// Evolves the projection of f onto the basis under the symbol:
///   u(t, x)  = sum_k g_k(t)  c_k phi_k(x),   c_k = <f, phi_k>
///   ut(t, x) = sum_k g_k'(t) c_k phi_k(x)
/// Throws NumericalError("unstable symbol") if Re p(lambda_k) T > 50.
WaveField propagate(const EigenBasis& basis, const InitialDatum& f, const Symbol& symbol,
                    const TimeGrid& grid, const PropagateOptions& options = {});

/// Binary dump: M, n, complex flag as int64 LE, then u and ut row-major,
/// each entry a (re, im) pair of doubles when complex, else re only.
void save_field(const std::filesystem::path& path, const WaveField& field);
WaveField load_field(const std::filesystem::path& path);

}  // namespace echoloc
