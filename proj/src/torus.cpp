#include "walklab/torus.hpp"

#include <cmath>

namespace walklab {

PointSet::PointSet(Eigen::MatrixXd points, std::optional<Vec> mass)
    : points_(std::move(points)), mass_(std::move(mass)) {
  if (points_.rows() == 0) throw ValidationError("PointSet: empty point set");
  for (Eigen::Index i = 0; i < points_.rows(); ++i)
    for (Eigen::Index j = 0; j < points_.cols(); ++j)
      points_(i, j) = reduce_unit(points_(i, j));
  if (mass_) {
    if (mass_->size() != points_.rows())
      throw ValidationError("PointSet: mass length != point count");
    double total = 0.0;
    for (Eigen::Index i = 0; i < mass_->size(); ++i) {
      if ((*mass_)[i] < 0.0) throw ValidationError("PointSet: negative mass");
      total += (*mass_)[i];
    }
    if (total > 1.0 + 1e-12)
      throw ValidationError("PointSet: masses sum to more than 1");
  }
}

double distance_to_set(const TorusPoint& x, const PointSet& A) {
  if (x.dim() != A.dim())
    throw ValidationError("distance_to_set: dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < A.size(); ++i) {
    double s = 0.0;
    for (int j = 0; j < A.dim(); ++j) {
      double g = nearest_integer_norm(x[j] - A.points()(i, j));
      s += g * g;
    }
    if (s < best) best = s;
  }
  return std::sqrt(best);
}

void DiscreteMeasure::validate() const {
  if (points.rows() == 0) throw ValidationError("DiscreteMeasure: no atoms");
  if (mass.size() != points.rows())
    throw ValidationError("DiscreteMeasure: mass length != atom count");
  double total = 0.0;
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    if (mass[i] < 0.0) throw ValidationError("DiscreteMeasure: negative mass");
    total += mass[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("DiscreteMeasure: masses must sum to 1");
}

DiscreteMeasure DiscreteMeasure::dirac(const TorusPoint& x) {
  DiscreteMeasure m;
  m.points = x.coords().transpose();
  m.mass = Vec::Ones(1);
  return m;
}

DiscreteMeasure DiscreteMeasure::uniform_atoms_1d(
    const std::vector<double>& xs) {
  if (xs.empty()) throw ValidationError("uniform_atoms_1d: no atoms");
  DiscreteMeasure m;
  m.points.resize(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i)
    m.points(static_cast<Eigen::Index>(i), 0) = reduce_unit(xs[i]);
  m.mass = Vec::Constant(static_cast<Eigen::Index>(xs.size()),
                         1.0 / static_cast<double>(xs.size()));
  return m;
}

}  // namespace walklab
