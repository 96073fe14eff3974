#include "echoloc/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <iomanip>

#include <Eigen/SparseCholesky>

#include "echoloc/error.hpp"
#include "echoloc/io.hpp"
#include "echoloc/rng.hpp"

namespace echoloc {

double EigenBasis::inner(const Vector& f, const Vector& g) const {
  if (counting_measure()) return f.dot(g);
  return (f.array() * g.array() * measure.array()).sum();
}

Vector EigenBasis::project(const Vector& f) const {
  if (f.size() != phi.rows()) throw ValidationError("datum length does not match basis");
  if (counting_measure()) return phi.transpose() * f;
  return phi.transpose() * f.cwiseProduct(measure);
}

namespace {

// Largest-magnitude entry made positive; near-ties go to the lowest index.
void normalize_signs(Matrix& phi) {
  for (Eigen::Index k = 0; k < phi.cols(); ++k) {
    const double top = phi.col(k).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
      if (std::abs(phi(i, k)) >= top * (1.0 - 1e-10)) {
        if (phi(i, k) < 0.0) phi.col(k) *= -1.0;
        break;
      }
    }
  }
}

EigenBasis finalize(Vector mu, Matrix phi) {
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    if (std::abs(mu(k)) <= kZeroEigenvalueTol) {
      mu(k) = 0.0;
    } else if (mu(k) < 0.0) {
      std::ostringstream os;
      os << "negative Laplacian eigenvalue " << mu(k);
      throw NumericalError(os.str());
    }
  }
  normalize_signs(phi);
  EigenBasis basis;
  basis.lambda = mu.cwiseMax(0.0).cwiseSqrt();
  basis.mu = std::move(mu);
  basis.phi = std::move(phi);
  return basis;
}

void check_request(Eigen::Index n, std::size_t n_eigs) {
  if (n_eigs < 1) throw ValidationError("number of eigenpairs must be >= 1");
  if (n_eigs > static_cast<std::size_t>(n))
    throw ValidationError("requested more eigenpairs than vertices");
}

Matrix random_block(Eigen::Index n, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix x(n, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  return x;
}

// Orthonormalizes the columns of w against basis[:, 0:used] and each other
// (two Gram-Schmidt passes). Columns that collapse are replaced by random
// directions.
void orthonormalize_block(const Matrix& basis, Eigen::Index used, Matrix& w, Rng& rng) {
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = w.col(j).norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (used > 0) w.col(j) -= basis.leftCols(used) * (basis.leftCols(used).transpose() * w.col(j));
        if (j > 0) w.col(j) -= w.leftCols(j) * (w.leftCols(j).transpose() * w.col(j));
      }
      const double after = w.col(j).norm();
      if (after > 1e-10 * before && after > 0.0) {
        w.col(j) /= after;
        break;
      }
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = normal(rng);
    }
  }
}

}  // namespace

EigenBasis compute_basis(const Matrix& lap, std::size_t n_eigs) {
  if (lap.rows() != lap.cols()) throw ValidationError("Laplacian must be square");
  check_request(lap.rows(), n_eigs);
  const double scale = std::max(1.0, lap.cwiseAbs().maxCoeff());
  if ((lap - lap.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("Laplacian is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(lap);
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  const auto k = static_cast<Eigen::Index>(n_eigs);
  return finalize(solver.eigenvalues().head(k), solver.eigenvectors().leftCols(k));
}

EigenBasis compute_basis(const SparseMatrix& lap, std::size_t n_eigs, const EigenOptions& options) {
  if (lap.rows() != lap.cols()) throw ValidationError("Laplacian must be square");
  const Eigen::Index n = lap.rows();
  check_request(n, n_eigs);
  {
    const SparseMatrix diff = lap - SparseMatrix(lap.transpose());
    double worst = 0.0;
    for (Eigen::Index c = 0; c < diff.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(diff, c); it; ++it) worst = std::max(worst, std::abs(it.value()));
    if (worst > 1e-12 * std::max(1.0, lap.coeffs().cwiseAbs().maxCoeff()))
      throw ValidationError("Laplacian is not symmetric");
  }

  const auto nev = static_cast<Eigen::Index>(n_eigs);
  const auto block = static_cast<Eigen::Index>(std::max<std::size_t>(1, options.block_size));
  const Eigen::Index max_dim = std::min<Eigen::Index>(n, std::max(2 * nev + 4 * block, nev + 60));
  if (max_dim >= n || max_dim < nev + 2 * block) return compute_basis(Matrix(lap), n_eigs);

  // Shift-invert: the wanted small eigenvalues of L are the dominant ones of
  // (L + sigma I)^{-1}.
  const double sigma = 1e-2 * std::max(1e-12, lap.diagonal().mean());
  SparseMatrix shifted = lap;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma;
  Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
  if (factor.info() != Eigen::Success) throw NumericalError("shift-invert factorization failed");

  Rng rng(options.seed);
  Matrix basis(n, max_dim);
  Eigen::Index used = 0;
  Matrix next = random_block(n, block, rng);

  for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
    while (used + block <= max_dim) {
      Matrix w = factor.solve(next);
      orthonormalize_block(basis, used, w, rng);
      basis.middleCols(used, block) = w;
      used += block;
      next = w;
    }

    const Matrix v = basis.leftCols(used);
    const Matrix lv = lap * v;
    Matrix h = v.transpose() * lv;
    h = (0.5 * (h + h.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(h);
    const Vector theta = ritz.eigenvalues();
    const Matrix& s = ritz.eigenvectors();

    const Matrix y = v * s.leftCols(nev);
    const Matrix r = lv * s.leftCols(nev) - y * theta.head(nev).asDiagonal();
    std::vector<Eigen::Index> unconverged;
    for (Eigen::Index k = 0; k < nev; ++k) {
      if (r.col(k).norm() > options.residual_tol * 0.5 * std::max(1.0, std::abs(theta(k))))
        unconverged.push_back(k);
    }
    if (unconverged.empty()) return finalize(theta.head(nev), y);

    // Thick restart: keep the best Ritz vectors and expand from the residuals
    // of the unconverged ones.
    const Eigen::Index keep = std::min<Eigen::Index>(nev + block, used - block);
    basis.leftCols(keep) = v * s.leftCols(keep);
    used = keep;
    next.resize(n, block);
    for (Eigen::Index j = 0; j < block; ++j) {
      if (static_cast<std::size_t>(j) < unconverged.size()) {
        next.col(j) = r.col(unconverged[static_cast<std::size_t>(j)]);
      } else {
        next.col(j) = random_block(n, 1, rng);
      }
    }
  }
  throw NumericalError("Krylov eigensolver did not converge");
}

namespace {

// Rotates a degenerate kernel block so that column 0 is `trivial`.
void canonicalize_kernel(EigenBasis& basis, const Vector& trivial) {
  const std::size_t z = zero_multiplicity(basis);
  if (z < 2) return;
  const auto zi = static_cast<Eigen::Index>(z);
  const Matrix kernel = basis.phi.leftCols(zi);
  Vector t = kernel * (kernel.transpose() * trivial);
  if (t.norm() < 1e-8) return;
  t.normalize();
  const Matrix rest = kernel - t * (t.transpose() * kernel);
  Eigen::JacobiSVD<Matrix> svd(rest, Eigen::ComputeThinU);
  Matrix rotated(kernel.rows(), zi);
  rotated.col(0) = t;
  rotated.rightCols(zi - 1) = svd.matrixU().leftCols(zi - 1);
  normalize_signs(rotated);
  basis.phi.leftCols(zi) = rotated;
}

}  // namespace

EigenBasis compute_basis(const WeightedGraph& graph, LaplacianVariant variant, std::size_t n_eigs,
                         const EigenOptions& options) {
  const std::size_t n = graph.size();
  const bool dense = options.method == EigenMethod::dense ||
                     (options.method == EigenMethod::automatic && n <= options.dense_limit);
  const LaplacianVariant solved =
      variant == LaplacianVariant::random_walk ? LaplacianVariant::symmetric : variant;

  EigenBasis basis = dense ? compute_basis(laplacian(graph, solved), n_eigs)
                           : compute_basis(laplacian_sparse(graph, solved), n_eigs, options);

  Vector trivial;
  if (solved == LaplacianVariant::unnormalized) {
    trivial = Vector::Ones(static_cast<Eigen::Index>(n));
  } else {
    trivial = graph.degrees().cwiseSqrt();
  }
  canonicalize_kernel(basis, trivial.normalized());

  if (variant == LaplacianVariant::random_walk) {
    const Vector deg = graph.degrees();
    basis.phi = deg.cwiseSqrt().cwiseInverse().asDiagonal() * basis.phi;
    basis.measure = deg;
  }
  return basis;
}

double spectral_gap(const EigenBasis& basis) {
  if (basis.size() < 2) throw ValidationError("spectral_gap needs at least 2 eigenpairs");
  const double gap = basis.lambda(1);
  if (gap <= 1e-6) throw DisconnectedGraph("spectral_gap: graph is disconnected (lambda_1 = 0)");
  return gap;
}

std::size_t zero_multiplicity(const EigenBasis& basis) {
  std::size_t z = 0;
  while (z < basis.size() && basis.mu(static_cast<Eigen::Index>(z)) == 0.0) ++z;
  return z;
}

BasisDiagnostics diagnose(const Matrix& lap, const EigenBasis& basis) {
  BasisDiagnostics d;
  const Matrix r = lap * basis.phi - basis.phi * basis.mu.asDiagonal();
  for (Eigen::Index k = 0; k < r.cols(); ++k)
    d.max_residual = std::max(d.max_residual, r.col(k).norm() / std::max(1.0, basis.mu(k)));
  Matrix gram = basis.counting_measure()
                    ? Matrix(basis.phi.transpose() * basis.phi)
                    : Matrix(basis.phi.transpose() * basis.measure.asDiagonal() * basis.phi);
  gram -= Matrix::Identity(gram.rows(), gram.cols());
  d.max_orthogonality = gram.cwiseAbs().maxCoeff();
  return d;
}

// ---- cache ---------------------------------------------------------------

void save_basis(const std::filesystem::path& path, const EigenBasis& basis) {
  BinaryWriter out(path);
  out.write_i64(static_cast<std::int64_t>(basis.vertices()));
  out.write_i64(static_cast<std::int64_t>(basis.size()));
  out.write_doubles(std::span<const double>(basis.mu.data(), static_cast<std::size_t>(basis.mu.size())));
  out.write_doubles(std::span<const double>(basis.phi.data(), static_cast<std::size_t>(basis.phi.size())));
  out.close();
}

EigenBasis load_basis(const std::filesystem::path& path) {
  BinaryReader in(path);
  const std::int64_t n = in.read_i64();
  const std::int64_t k = in.read_i64();
  if (n < 1 || k < 1 || k > n) throw ValidationError("corrupt basis file " + path.string());
  Vector mu(k);
  in.read_doubles(std::span<double>(mu.data(), static_cast<std::size_t>(k)));
  Matrix phi(n, k);
  in.read_doubles(std::span<double>(phi.data(), static_cast<std::size_t>(n * k)));
  EigenBasis basis;
  basis.lambda = mu.cwiseMax(0.0).cwiseSqrt();
  basis.mu = std::move(mu);
  basis.phi = std::move(phi);
  return basis;
}

std::uint64_t basis_cache_key(const WeightedGraph& graph, LaplacianVariant variant, std::size_t n_eigs) {
  Fnv1a hash;
  const Matrix& w = graph.weights();
  hash.update(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
  hash.update_u64(static_cast<std::uint64_t>(graph.size()));
  hash.update_u64(static_cast<std::uint64_t>(n_eigs));
  hash.update_string(to_string(variant));
  return hash.value();
}

EigenBasis cached_basis(const std::filesystem::path& dir, const WeightedGraph& graph,
                        LaplacianVariant variant, std::size_t n_eigs, const EigenOptions& options) {
  std::ostringstream name;
  name << std::hex << std::setw(16) << std::setfill('0') << basis_cache_key(graph, variant, n_eigs)
       << ".basis";
  const auto path = dir / name.str();
  if (std::filesystem::exists(path)) {
    EigenBasis basis = load_basis(path);
    if (basis.vertices() == graph.size() && basis.size() == n_eigs) {
      if (variant == LaplacianVariant::random_walk) basis.measure = graph.degrees();
      return basis;
    }
  }
  EigenBasis basis = compute_basis(graph, variant, n_eigs, options);
  std::filesystem::create_directories(dir);
  save_basis(path, basis);
  return basis;
}

}  // namespace echoloc
