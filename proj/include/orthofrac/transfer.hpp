#pragma once

#include <vector>

#include "orthofrac/mesh.hpp"
#include "orthofrac/state.hpp"

namespace orthofrac {

/// Maps fields from a mesh onto a refinement of it.
///
/// Nodal fields are interpolated with the old element shape functions. History values are
/// copied where an element is unchanged; elsewhere they are projected to the old nodes by
/// lumped least squares and interpolated at the new quadrature points.
class MeshTransfer {
 public:
  MeshTransfer(const QuadtreeMesh& old_mesh, const QuadtreeMesh& new_mesh,
               int order = 2);

  Eigen::VectorXd scalar(const Eigen::VectorXd& old_values) const;
  /// Two components per node.
  Eigen::VectorXd vector(const Eigen::VectorXd& old_values) const;
  std::vector<double> history(const std::vector<double>& old_H) const;

 private:
  struct Stencil {
    std::vector<int> nodes;
    std::vector<double> weights;
  };
  double apply(const Stencil& s, const Eigen::VectorXd& v, int stride, int comp) const;

  const QuadtreeMesh& old_;
  const QuadtreeMesh& new_;
  bool identical_ = false;
  std::vector<Stencil> node_stencil_;       ///< per new node
  std::vector<Stencil> qp_stencil_;         ///< per new quadrature point (old nodes)
  std::vector<int> qp_copy_;                ///< old quadrature point to copy, or -1
  std::vector<std::vector<double>> old_qp_N_;   ///< old shape values per old quadrature point
  std::vector<double> old_qp_w_;
  std::vector<int> old_qp_element_;
};

/// Fields of `old_state` carried over to `new_mesh`; H stays non-negative.
/// Throws MeshError when a new node cannot be located in the old mesh.
SolutionState transfer_state(const QuadtreeMesh& old_mesh, const SolutionState& old_state,
                             const QuadtreeMesh& new_mesh, int order = 2);

}  // namespace orthofrac
