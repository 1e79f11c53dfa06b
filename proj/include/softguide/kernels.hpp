#pragma once

// Data-parallel loops of the FD oracle. Each kernel has a serial reference
// and an OpenMP version producing identical results.

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "softguide/fd_oracle.hpp"

namespace softguide::kernels {

// y = H x, nodal layout (x2 fastest).
void apply_operator_serial(const fd::DiscreteOperator& op, const double* x, double* y);
void apply_operator_omp(const fd::DiscreteOperator& op, const double* x, double* y);

// Per-mode scalar pivots of a Dirichlet chain with diagonal a_k and
// off-diagonal magnitude sqrt(c): s_0 = a, s_t = a - c / s_{t-1}.
// Pivots at step t go to store[t * n2 + k] if store is non-null; the last
// step goes to last. Returns the number of negative pivots.
long exterior_sweep_serial(const double* a, int n2, int steps, double c, double pivmin, double* store,
                           double* last);
long exterior_sweep_omp(const double* a, int n2, int steps, double c, double pivmin, double* store,
                        double* last);

// Node selection grouped by grid column.
struct ColumnGroup {
  int i = 0;
  std::vector<int> rows;
  std::vector<std::size_t> pos;  // position of each node in the output ordering
};

// Resolvent entries on the selected nodes from the closed-form modal
// Green's function of the x1 chain. theta_k = acosh(1 + (lambda_k + kappa^2) h^2 / 2).
void resolvent_block_serial(const std::vector<ColumnGroup>& groups, const Eigen::MatrixXd& Q,
                            const Eigen::VectorXd& theta, int n1, double h, Eigen::MatrixXd& out);
void resolvent_block_omp(const std::vector<ColumnGroup>& groups, const Eigen::MatrixXd& Q,
                         const Eigen::VectorXd& theta, int n1, double h, Eigen::MatrixXd& out);

// Fraction of each cell (i, j) covered by {0 < x2 < d + eps f(x1)}.
void cell_fractions_serial(const fd::Grid2D& g, const profiles::Profile& f, double eps,
                           const std::vector<std::pair<int, int>>& cells, std::vector<double>& out);
void cell_fractions_omp(const fd::Grid2D& g, const profiles::Profile& f, double eps,
                        const std::vector<std::pair<int, int>>& cells, std::vector<double>& out);

// Single cell, shared by both versions.
double cell_fraction(const fd::Grid2D& g, const profiles::Profile& f, double eps, int i, int j);

}  // namespace softguide::kernels
