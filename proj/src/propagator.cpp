#include "echoloc/propagator.hpp"

#include <cmath>
#include <sstream>

#include "echoloc/error.hpp"
#include "echoloc/io.hpp"

namespace echoloc {

Symbol Symbol::wave(double attenuation) {
  if (!(attenuation >= 0.0) || !std::isfinite(attenuation))
    throw ValidationError("wave attenuation must be >= 0");
  Symbol s;
  s.kind_ = Kind::wave_attenuated;
  s.name_ = "wave";
  s.attenuation_ = attenuation;
  return s;
}

Symbol Symbol::custom(std::string name, std::function<Complex(double)> p) {
  if (!p) throw ValidationError("symbol needs a multiplier function");
  Symbol s;
  s.kind_ = Kind::first_order;
  s.name_ = std::move(name);
  s.p_ = std::move(p);
  return s;
}

Symbol Symbol::heat() {
  return custom("heat", [](double l) { return Complex(-l * l, 0.0); });
}

Symbol Symbol::airy() {
  return custom("airy", [](double l) { return Complex(0.0, l * l * l); });
}

Symbol Symbol::schrodinger() {
  return custom("schrodinger", [](double l) { return Complex(0.0, l); });
}

Symbol Symbol::parse(const std::string& name, double attenuation) {
  if (name == "wave") return wave(attenuation);
  if (name == "heat") return heat();
  if (name == "airy") return airy();
  if (name == "schrodinger") return schrodinger();
  throw ValidationError("unknown symbol '" + name + "'");
}

Complex Symbol::amplitude(double lambda, double t) const {
  if (kind_ == Kind::wave_attenuated)
    return {std::cos(lambda * t) * std::exp(-attenuation_ * lambda * t), 0.0};
  return std::exp(p_(lambda) * t);
}

Complex Symbol::derivative(double lambda, double t) const {
  if (kind_ == Kind::wave_attenuated) {
    const double decay = std::exp(-attenuation_ * lambda * t);
    return {(-lambda * std::sin(lambda * t) - attenuation_ * lambda * std::cos(lambda * t)) * decay, 0.0};
  }
  const Complex p = p_(lambda);
  return p * std::exp(p * t);
}

TimeGrid::TimeGrid(double horizon, std::size_t samples) : horizon_(horizon), samples_(samples) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("time horizon must be > 0");
  if (samples < 2) throw ValidationError("time grid needs at least 2 samples");
}

double TimeGrid::time(std::size_t m) const {
  if (m + 1 == samples_) return horizon_;
  return horizon_ * static_cast<double>(m) / static_cast<double>(samples_ - 1);
}

Vector TimeGrid::trapezoid_weights() const {
  Vector w = Vector::Constant(static_cast<Eigen::Index>(samples_), step());
  w(0) *= 0.5;
  w(w.size() - 1) *= 0.5;
  return w;
}

bool WaveField::is_real() const {
  return (u.imag().array() == 0.0).all() && (ut.imag().array() == 0.0).all();
}

InitialDatum initial_datum(const WeightedGraph& graph, std::size_t v, const DatumOptions& options) {
  if (v >= graph.size()) throw ValidationError("source vertex out of range");
  const auto vi = static_cast<Eigen::Index>(v);
  InitialDatum f;
  f.source = v;
  f.values = graph.weights().row(vi).transpose();
  if ((f.values.array() == 0.0).all()) throw ValidationError("isolated source");
  f.values(vi) = options.zero_self_weight ? 0.0 : 1.0;
  return f;
}

InitialDatum dirac_datum(std::size_t n, std::size_t v) {
  if (v >= n) throw ValidationError("dirac vertex out of range");
  InitialDatum f;
  f.source = v;
  f.values = Vector::Zero(static_cast<Eigen::Index>(n));
  f.values(static_cast<Eigen::Index>(v)) = 1.0;
  return f;
}

WaveField propagate(const EigenBasis& basis, const InitialDatum& f, const Symbol& symbol,
                    const TimeGrid& grid, const PropagateOptions& options) {
  if (static_cast<std::size_t>(f.values.size()) != basis.vertices())
    throw ValidationError("initial datum and basis have different vertex counts");
  if (!f.values.allFinite()) throw ValidationError("initial datum is not finite");

  const auto modes = static_cast<Eigen::Index>(basis.size());
  const auto samples = static_cast<Eigen::Index>(grid.samples());
  if (symbol.kind() == Symbol::Kind::first_order) {
    for (Eigen::Index k = 0; k < modes; ++k) {
      if (symbol.p(basis.lambda(k)).real() * grid.horizon() > 50.0) {
        std::ostringstream os;
        os << "unstable symbol '" << symbol.name() << "': Re p(lambda_" << k << ") T > 50";
        throw NumericalError(os.str());
      }
    }
  }

  Vector coeff = basis.project(f.values);
  if (options.drop_constant_mode) coeff(0) = 0.0;

  // amp(m, k) = g_k(t_m) c_k; u = amp * phi^T.
  ComplexMatrix amp(samples, modes);
  ComplexMatrix damp(samples, modes);
  for (Eigen::Index m = 0; m < samples; ++m) {
    const double t = grid.time(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < modes; ++k) {
      amp(m, k) = symbol.amplitude(basis.lambda(k), t) * coeff(k);
      damp(m, k) = symbol.derivative(basis.lambda(k), t) * coeff(k);
    }
  }

  WaveField field;
  field.source = f.source;
  const Matrix phi_t = basis.phi.transpose();
  const bool real = (amp.imag().array() == 0.0).all() && (damp.imag().array() == 0.0).all();
  if (real) {
    field.u = (amp.real() * phi_t).cast<Complex>();
    field.ut = (damp.real() * phi_t).cast<Complex>();
  } else {
    const ComplexMatrix phi_c = phi_t.cast<Complex>();
    field.u = amp * phi_c;
    field.ut = damp * phi_c;
  }
  if (!field.u.allFinite() || !field.ut.allFinite()) throw NumericalError("propagated field is not finite");
  return field;
}

void save_field(const std::filesystem::path& path, const WaveField& field) {
  const bool cplx = !field.is_real();
  BinaryWriter out(path);
  out.write_i64(static_cast<std::int64_t>(field.samples()));
  out.write_i64(static_cast<std::int64_t>(field.vertices()));
  out.write_i64(cplx ? 1 : 0);
  for (const ComplexMatrix* m : {&field.u, &field.ut}) {
    std::vector<double> row;
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      row.clear();
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        row.push_back((*m)(r, c).real());
        if (cplx) row.push_back((*m)(r, c).imag());
      }
      out.write_doubles(row);
    }
  }
  out.close();
}

WaveField load_field(const std::filesystem::path& path) {
  BinaryReader in(path);
  const std::int64_t samples = in.read_i64();
  const std::int64_t n = in.read_i64();
  const std::int64_t cplx = in.read_i64();
  if (samples < 1 || n < 1 || (cplx != 0 && cplx != 1))
    throw ValidationError("corrupt field file " + path.string());
  WaveField field;
  for (ComplexMatrix* m : {&field.u, &field.ut}) {
    m->resize(samples, n);
    std::vector<double> row(static_cast<std::size_t>(n * (cplx ? 2 : 1)));
    for (Eigen::Index r = 0; r < samples; ++r) {
      in.read_doubles(row);
      for (Eigen::Index c = 0; c < n; ++c) {
        const auto i = static_cast<std::size_t>(cplx ? 2 * c : c);
        (*m)(r, c) = Complex(row[i], cplx ? row[i + 1] : 0.0);
      }
    }
  }
  return field;
}

}  // namespace echoloc
