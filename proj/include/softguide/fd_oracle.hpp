#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "softguide/profiles.hpp"
#include "softguide/well1d.hpp"

namespace softguide::fd {

using profiles::Profile;
using well1d::WellParams;

// ---------------------------------------------------------------- 1D

// Symmetric tridiagonal matrix with constant off-diagonal.
struct Tridiagonal {
  Eigen::VectorXd diag;
  double off = 0.0;

  // Number of eigenvalues strictly below E (Sturm sequence).
  long count_below(double E) const;
  // k-th smallest eigenvalue (1-based) by bisection on [lo, hi].
  double eigenvalue(long k, double lo, double hi, double abs_tol) const;
  double gershgorin_lower() const;
};

// -d^2/dx^2 - alpha chi_[0,d] on [lo, d + hi] with nodes h apart, Dirichlet ends.
// Nodes sit on 0 and d, where the potential carries half weight.
Tridiagonal well_tridiagonal(const WellParams& p, double lo, double hi, double h);

struct Spectrum1D {
  double h = 0.0;
  double L = 0.0;
  std::vector<double> eigs_h;      // negative eigenvalues at h
  std::vector<double> eigs_half;   // and at h/2
  std::vector<double> richardson;  // (4 e_{h/2} - e_h) / 3, paired by index
  long count = 0;                  // negative count at h/2
};

Spectrum1D solve_1d(const WellParams& p, double L, double h, double abs_tol = 1e-12);

// ---------------------------------------------------------------- 2D

struct Grid2D {
  double d = 1.0;
  double h = 0.1;
  double L = 1.0;
  double H_lo = 1.0;
  double H_hi = 1.0;
  int n1 = 0;  // interior nodes along x1
  int n2 = 0;  // interior nodes along x2
  int j_zero = 0;  // row on x2 = 0
  int j_top = 0;   // row on x2 = d

  // Validates that h divides d, L, H_lo and H_hi.
  static Grid2D make(double d, double h, double L, double H_lo, double H_hi);
  // Rounds the extents up to multiples of h.
  static Grid2D fitted(double d, double h, double L_min, double H_lo_min, double H_hi_min);

  double x1(int i) const { return -L + (i + 1) * h; }
  double x2(int j) const { return -H_lo + (j + 1) * h; }
  std::size_t size() const { return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n2 + j; }
};

// Cells where the deformed strip differs from the flat one.
// The operator equals H_{alpha,0} - diag(u) on these rows.
struct PerturbedColumn {
  int i = 0;
  std::vector<int> rows;
  std::vector<double> u;  // alpha * (area fraction in Omega_eps - in Omega_0)
};

struct DiscreteOperator {
  Grid2D grid;
  double alpha = 0.0;
  double epsilon = 0.0;
  Profile profile;
  Eigen::VectorXd column_potential;  // -alpha * area fraction of Omega_0, per row
  std::vector<PerturbedColumn> perturbation;

  bool is_background() const { return perturbation.empty(); }
  std::string description() const;
  double potential(int i, int j) const;
  std::size_t perturbed_cells() const;
  DiscreteOperator background() const;
  Eigen::SparseMatrix<double> to_sparse() const;
  Tridiagonal transverse() const;  // x2 part of H_{alpha,0}
};

void check_grid_admissible(const Grid2D& g, const WellParams& p, const Profile& f, double epsilon);

DiscreteOperator build_h2d(const WellParams& p, const Profile& f, double epsilon, const Grid2D& grid);

// Default truncation: L = max(40 d, 10 / dhat), clearances 10 / sqrt(-mu1).
Grid2D default_grid(const well1d::WellSpectrum& well, const Profile& f, double epsilon, double h);

// Eigen-decomposition of the transverse tridiagonal.
struct ModalBasis {
  Eigen::VectorXd lambda;  // ascending
  Eigen::MatrixXd Q;       // columns are orthonormal eigenvectors
};

ModalBasis modal_basis(const DiscreteOperator& op);

struct SolveOptions {
  bool want_vectors = true;  // eigenvalues always come from inverse iteration
  std::optional<double> guess;  // rough lambda_1 used to seed the bracket
  double isolation = 0.25;      // bracket width / gap before inverse iteration
  bool truncation_estimate = false;
  int max_bisection = 200;
  int max_inverse_iterations = 200;
  double residual_tol = 1e-10;
};

struct SolveDiagnostics {
  long count_below_threshold = 0;
  int factorizations = 0;
  int inverse_iterations = 0;
  int indefinite_blocks = 0;
  double lower_bound = 0.0;
  double threshold = 0.0;
  double transverse_threshold = 0.0;  // bottom of the x2 operator, i.e. mu1 on this grid
};

struct SpectralResult {
  Grid2D grid;
  std::vector<double> eigenvalues;
  std::vector<Eigen::VectorXd> eigenvectors;  // nodal, sum v^2 h^2 = 1
  std::vector<double> residuals;              // ||A v - lambda v|| / ||v||
  std::optional<double> truncation_estimate;
  SolveDiagnostics diagnostics;
};

// Number of eigenvalues of op strictly below E (inertia of op - E).
long count_below(const DiscreteOperator& op, double E);

SpectralResult lowest_eigs(const DiscreteOperator& op, double threshold, int k_max,
                           const SolveOptions& opt = {});

// Truncation estimate: |lambda1(L) - lambda1(2L)| plus the change of the
// transverse threshold under doubling of the clearances.
struct TruncationEstimate {
  double tau = 0.0;
  double longitudinal = 0.0;
  double transverse = 0.0;
  long count_doubled = 0;
};

TruncationEstimate truncation_estimate(const DiscreteOperator& op, std::optional<double> lambda1);

// (H + kappa^2) x = rhs, nodal vectors.
Eigen::VectorXd resolvent_solve(const DiscreteOperator& op, double kappa, const Eigen::VectorXd& rhs);

// Entries [(H_{alpha,0} + kappa^2)^{-1}]_{pq} for node indices p, q in S.
Eigen::MatrixXd resolvent_block(const DiscreteOperator& op0, double kappa, const std::vector<std::size_t>& S);
Eigen::MatrixXd resolvent_block(const DiscreteOperator& op0, const ModalBasis& basis, double kappa,
                                const std::vector<std::size_t>& S);

// H v in the nodal layout.
Eigen::VectorXd apply(const DiscreteOperator& op, const Eigen::VectorXd& v);

using Field = std::function<double(double, double)>;

// |<psi, u>| / (|psi| |u|) with u sampled at the nodes.
double overlap(const SpectralResult& r, const Field& field, std::size_t which = 0);
double overlap(const Grid2D& g, const Eigen::VectorXd& psi, const Field& field);
// Separable field u = g(x1) v(x2).
double overlap_separable(const Grid2D& g, const Eigen::VectorXd& psi, const std::function<double(double)>& g1,
                         const std::function<double(double)>& v2);

void write_eigenvector_csv(const std::string& path, const Grid2D& g, const Eigen::VectorXd& v, int stride = 1);

}  // namespace softguide::fd
