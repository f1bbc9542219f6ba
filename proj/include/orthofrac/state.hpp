#pragma once

#include <vector>

#include "orthofrac/types.hpp"

namespace orthofrac {

/// Nodal displacement (u0, v0, u1, v1, ...), nodal phase field and the history field at
/// quadrature points (element-major, in element quadrature order).
struct SolutionState {
  Eigen::VectorXd u;
  Eigen::VectorXd phi;
  std::vector<double> H;

  static SolutionState zeros(int num_nodes, int num_qp) {
    SolutionState s;
    s.u = Eigen::VectorXd::Zero(2 * num_nodes);
    s.phi = Eigen::VectorXd::Zero(num_nodes);
    s.H.assign(num_qp, 0.0);
    return s;
  }
};

}  // namespace orthofrac
