#pragma once

#include "bscreg/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace bscreg {

using Tri = std::array<int, 3>;

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<Tri> tris;
  std::vector<char> boundary;  // node flag
  double h = 0.0;

  // Filled by finalize().
  std::vector<double> area;
  std::vector<Eigen::Matrix<double, 2, 3>> grad_op;  // per-triangle nodal gradient operator
  std::vector<double> lumped;                         // lumped mass per node

  void finalize();
  size_t node_count() const { return nodes.size(); }
  double min_angle_deg() const;
  double total_area() const;
  Vec2 tri_gradient(size_t t, const Eigen::VectorXd& u) const;
};

// Conforming Delaunay mesh of a convex body: boundary resampled to spacing <= h
// (polygon corners sharper than 10 degrees kept), hexagonal interior lattice.
Mesh triangulate(const ConvexBody& body, double h);

struct ScalarField {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd values;
  bool admissible = false;
};

double grad_sup(const ScalarField& field);
// Max gradient over triangles touching a boundary node.
double grad_sup_boundary(const ScalarField& field);

// Point location over a mesh, bucketed on a uniform grid.
class Locator {
 public:
  explicit Locator(std::shared_ptr<const Mesh> mesh);
  // Triangle index and barycentric coordinates, or nullopt outside the mesh (tolerance tol).
  std::optional<std::pair<int, Eigen::Vector3d>> locate(const Vec2& x, double tol = 1e-10) const;
  std::optional<double> evaluate(const Eigen::VectorXd& values, const Vec2& x) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  Vec2 lo_;
  double cell_;
  int nx_, ny_;
  std::vector<std::vector<int>> buckets_;
};

// P1 interpolation of src onto the nodes of dst; nodes outside src use fallback.
Eigen::VectorXd transfer(const ScalarField& src, const Mesh& dst, const ScalarFn& fallback);

}  // namespace bscreg
