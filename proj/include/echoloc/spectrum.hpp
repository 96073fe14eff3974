#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "echoloc/graph.hpp"

namespace echoloc {

/// First N Laplacian eigenpairs, ascending. mu holds Laplacian eigenvalues,
/// lambda = sqrt(mu) the oscillation frequencies.
///
/// Eigenvectors are orthonormal under the inner product <f,g> = sum_x m_x f_x g_x,
/// where m is `measure`. An empty measure means the counting measure (m_x = 1),
/// which is the case for the unnormalized and symmetric variants; the
/// random-walk variant carries the degree vector.
struct EigenBasis {
  Vector mu;
  Vector lambda;
  Matrix phi;  // n x N, column k is phi_k
  Vector measure;

  std::size_t size() const { return static_cast<std::size_t>(mu.size()); }
  std::size_t vertices() const { return static_cast<std::size_t>(phi.rows()); }
  bool counting_measure() const { return measure.size() == 0; }

  /// <f, g> under the basis measure.
  double inner(const Vector& f, const Vector& g) const;
  /// Coefficients c_k = <f, phi_k>.
  Vector project(const Vector& f) const;
};

enum class EigenMethod { automatic, dense, krylov };

struct EigenOptions {
  EigenMethod method = EigenMethod::automatic;
  std::size_t dense_limit = 3000;  // automatic switches to krylov above this
  double residual_tol = 1e-8;      // relative to max(1, mu)
  std::size_t block_size = 8;
  std::size_t max_restarts = 200;
  std::uint64_t seed = 0x5eed;
};

/// Eigenvalues within this distance of zero are set to exactly zero.
inline constexpr double kZeroEigenvalueTol = 1e-10;

/// Smallest N eigenpairs of a symmetric matrix with a dense solver.
EigenBasis compute_basis(const Matrix& lap, std::size_t n_eigs);
/// Smallest N eigenpairs of a sparse symmetric positive semi-definite matrix
/// via shift-invert block Krylov iterations with full reorthogonalization.
EigenBasis compute_basis(const SparseMatrix& lap, std::size_t n_eigs,
                         const EigenOptions& options = {});

/// Basis for a graph under a Laplacian variant. The random-walk basis is
/// recovered from the symmetric one by D^{-1/2} scaling. When the kernel is
/// degenerate (disconnected graph) its first vector is rotated onto the
/// trivial eigenvector of the variant so index 0 stays the trivial mode.
EigenBasis compute_basis(const WeightedGraph& graph, LaplacianVariant variant,
                         std::size_t n_eigs, const EigenOptions& options = {});

/// lambda_1; throws DisconnectedGraph when lambda_1 <= 1e-6.
double spectral_gap(const EigenBasis& basis);

/// Number of eigenvalues that are exactly zero after clamping.
std::size_t zero_multiplicity(const EigenBasis& basis);

struct BasisDiagnostics {
  double max_residual = 0.0;        // max_k |L phi_k - mu_k phi_k| / max(1, mu_k)
  double max_orthogonality = 0.0;   // max entry of |Phi^T M Phi - I|
};

/// Residuals against the operator the basis was computed for (for the
/// random-walk variant pass its general Laplacian).
BasisDiagnostics diagnose(const Matrix& lap, const EigenBasis& basis);

// ---- cache ---------------------------------------------------------------

/// Flat binary: n, N as int64 little-endian, then mu (N doubles), then phi
/// column-major (n*N doubles).
void save_basis(const std::filesystem::path& path, const EigenBasis& basis);
EigenBasis load_basis(const std::filesystem::path& path);

/// 64-bit FNV-1a over the weight matrix bytes, N and the variant name.
std::uint64_t basis_cache_key(const WeightedGraph& graph, LaplacianVariant variant,
                              std::size_t n_eigs);

/// compute_basis with an on-disk cache in `dir` (file <hex key>.basis).
EigenBasis cached_basis(const std::filesystem::path& dir, const WeightedGraph& graph,
                        LaplacianVariant variant, std::size_t n_eigs,
                        const EigenOptions& options = {});

}  // namespace echoloc
