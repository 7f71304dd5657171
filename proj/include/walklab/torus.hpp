#pragma once

// Geometry of the flat torus T^d = R^d / Z^d.
//
// Points are stored with coordinates reduced to [0,1).  The metric is the
// quotient metric: per coordinate the wrapped gap min(|dx|, 1-|dx|), combined
// in Euclidean fashion, so diam(T^d) = sqrt(d)/2.  Raising the metric to a
// power p in (0,1] again gives a metric (concavity of t^p), which is why the
// p-cost transport problems downstream are bona fide metric problems.

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "walklab/errors.hpp"

namespace walklab {

using Vec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;

// t mod 1, in [0,1).  Guards the t - floor(t) == 1.0 rounding case.
inline double reduce_unit(double t) {
  double u = t - std::floor(t);
  if (u >= 1.0) u -= 1.0;
  return u;
}

// Distance from t to the nearest integer, in [0, 1/2].
inline double nearest_integer_norm(double t) {
  double u = t - std::floor(t);
  if (u >= 1.0) u -= 1.0;
  return u <= 0.5 ? u : 1.0 - u;
}

// Wrapped gap between two reduced coordinates.
inline double wrapped_gap(double a, double b) {
  double delta = a - b;
  if (delta < 0) delta = -delta;
  return delta <= 0.5 ? delta : 1.0 - delta;
}

class TorusPoint {
 public:
  TorusPoint() = default;

  explicit TorusPoint(Vec coords) : coords_(std::move(coords)) {
    for (Eigen::Index i = 0; i < coords_.size(); ++i)
      coords_[i] = reduce_unit(coords_[i]);
  }

  static TorusPoint zero(int dim) { return TorusPoint(Vec::Zero(dim)); }

  int dim() const { return static_cast<int>(coords_.size()); }
  const Vec& coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

  // x + a on the torus; value semantics, *this is untouched.
  TorusPoint translated(const Eigen::Ref<const Vec>& a) const {
    if (a.size() != coords_.size())
      throw ValidationError("translated: dimension mismatch");
    return TorusPoint(coords_ + a);
  }

 private:
  Vec coords_;
};

inline double torus_distance(const Eigen::Ref<const Vec>& x,
                             const Eigen::Ref<const Vec>& y) {
  if (x.size() != y.size())
    throw ValidationError("torus_distance: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double g = nearest_integer_norm(x[i] - y[i]);
    s += g * g;
  }
  return std::sqrt(s);
}

inline double torus_distance(const TorusPoint& x, const TorusPoint& y) {
  return torus_distance(x.coords(), y.coords());
}

// A finite set of torus points, optionally weighted by nonnegative masses
// summing to at most 1 (a sub-probability: the mass the walk is known to
// put on the set).  Rows of `points` are the atoms.
class PointSet {
 public:
  PointSet(Eigen::MatrixXd points, std::optional<Vec> mass = std::nullopt);

  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  const Eigen::MatrixXd& points() const { return points_; }
  bool has_mass() const { return mass_.has_value(); }
  const Vec& mass() const { return *mass_; }

  // Total mass carried by the set; 1 when no masses are attached.
  double covered_mass() const { return mass_ ? mass_->sum() : 1.0; }

 private:
  Eigen::MatrixXd points_;
  std::optional<Vec> mass_;
};

// min over atoms of the torus distance to x.  O(|A|); the transport code
// keeps its own sorted/bucketed structures for bulk queries.
double distance_to_set(const TorusPoint& x, const PointSet& A);

// A discrete probability measure on T^d: atoms (rows) with masses summing
// to 1 within 1e-12.
struct DiscreteMeasure {
  Eigen::MatrixXd points;
  Vec mass;

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  void validate() const;

  static DiscreteMeasure dirac(const TorusPoint& x);
  // Equal-weight atoms at the given positions (d = 1 convenience).
  static DiscreteMeasure uniform_atoms_1d(const std::vector<double>& xs);
};

}  // namespace walklab
