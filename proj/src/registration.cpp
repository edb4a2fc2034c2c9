#include "foldopt/registration.hpp"

#include "foldopt/mesh.hpp"
#include "foldopt/optimizer.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace foldopt {

std::vector<bool> Contour::feature_flags() const {
  std::vector<bool> out(feature_ids.size());
  for (std::size_t i = 0; i < feature_ids.size(); ++i) out[i] = is_feature(i);
  return out;
}

std::map<std::string, Vec2> Contour::features() const {
  std::map<std::string, Vec2> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (is_feature(i)) out[feature_ids[i]] = points[i];
  return out;
}

void Contour::validate() const {
  if (points.size() < 3) throw InputError("contour: needs at least 3 vertices");
  if (feature_ids.size() != points.size()) throw InputError("contour: feature ids do not match vertices");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) throw InputError("contour: non-finite vertex");
    if (is_feature(i) && !seen.insert(feature_ids[i]).second)
      throw InputError("contour: duplicate feature id '" + feature_ids[i] + "'");
  }
}

ContourTemplate make_template(std::vector<Vec2> points, std::vector<std::string> ids) {
  Contour c{std::move(points), std::move(ids)};
  c.validate();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!c.is_feature(i)) throw InputError("template: every vertex needs an id");
  return c;
}

void RegistrationOptions::validate() const {
  if (!(kappa >= 0.0) || !(beta >= 0.0)) throw InputError("registration: kappa and beta must be non-negative");
  if (!(merge_cells > 0.0) || !(split_cells > 2.0 * merge_cells))
    throw InputError("registration: split threshold must exceed twice the merge threshold");
  if (coarse_levels < 0 || coarse_levels > 8) throw InputError("registration: coarse_levels must lie in [0, 8]");
  if (max_outer_iterations < 1 || max_inner_iterations < 1) throw InputError("registration: iteration caps must be positive");
  if (!(tolerance > 0.0)) throw InputError("registration: tolerance must be positive");
}

double interior_angle(const Vec2& p, const Vec2& q, const Vec2& n) {
  const Vec2 e1 = q - p, e2 = n - q;
  return kPi - std::atan2(cross2(e1, e2), e1.dot(e2));
}

namespace {

using Triplet = Eigen::Triplet<double>;

constexpr double kMinReferenceAngle = 1e-6;
// Floor applied to reference angles inside the fit loop, where a transient
// spike must not stall the next iteration.
constexpr double kReferenceAngleFloor = 0.05;

struct Reference {
  std::vector<double> length;  // segment i = (i, i + 1)
  std::vector<double> angle;   // at vertex j
  std::vector<double> span;    // mean of the two segments at vertex j
};

Reference reference_data(std::span<const Vec2> ref, bool strict = true) {
  const std::size_t n = ref.size();
  if (n < 3) throw InputError("registration: reference needs at least 3 vertices");
  Reference r;
  r.length.resize(n);
  r.angle.resize(n);
  r.span.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.length[i] = (ref[(i + 1) % n] - ref[i]).norm();
    if (!(r.length[i] > 0.0)) throw InputError("registration: zero-length reference segment");
  }
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t p = (j + n - 1) % n;
    r.angle[j] = interior_angle(ref[p], ref[j], ref[(j + 1) % n]);
    if (!strict) r.angle[j] = std::max(r.angle[j], kReferenceAngleFloor);
    if (!(r.angle[j] > kMinReferenceAngle)) throw InputError("registration: degenerate reference angle");
    r.span[j] = 0.5 * (r.length[p] + r.length[j]);
  }
  return r;
}

void check_sizes(std::span<const Vec2> s, std::span<const Vec2> ref) {
  if (s.size() != ref.size()) throw InputError("registration: contour and reference sizes differ");
}

void add(std::vector<Triplet>* J, Eigen::Index row, std::size_t vertex, const Vec2& g) {
  if (!J) return;
  J->emplace_back(row, static_cast<Eigen::Index>(2 * vertex), g.x());
  J->emplace_back(row, static_cast<Eigen::Index>(2 * vertex + 1), g.y());
}

Vec2 angle_gradient(const Vec2& v) { return Vec2(-v.y(), v.x()) / v.squaredNorm(); }

// Residuals whose squares sum to the energy, scaled by w. fit_block returns
// false when a midpoint leaves the field.
bool fit_block(std::span<const Vec2> s, const DistanceField& f, double w, Eigen::Index row0, Eigen::VectorXd& r,
               std::vector<Triplet>* J) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (i + 1) % n;
    const Vec2 m = 0.5 * (s[i] + s[k]);
    if (!m.allFinite() || !f.contains(m)) return false;
    Vec2 g;
    const double d = f.sample(m, g);
    const double l = (s[k] - s[i]).norm();
    const double sl = std::sqrt(l);
    const Eigen::Index row = row0 + static_cast<Eigen::Index>(i);
    r[row] = w * sl * d;
    if (J) {
      const Vec2 e = l > 0.0 ? Vec2((s[k] - s[i]) / l) : Vec2::Zero();
      const Vec2 de = l > 0.0 ? Vec2(d / (2.0 * sl) * e) : Vec2::Zero();
      add(J, row, i, w * (0.5 * sl * g - de));
      add(J, row, k, w * (0.5 * sl * g + de));
    }
  }
  return true;
}

void stretch_block(std::span<const Vec2> s, const Reference& ref, double w, Eigen::Index row0, Eigen::VectorXd& r,
                   std::vector<Triplet>* J) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (i + 1) % n;
    const double lr = ref.length[i];
    const double c = w * std::sqrt(0.5 * lr);
    const Vec2 v = s[k] - s[i];
    const double l = v.norm();
    const Eigen::Index row = row0 + static_cast<Eigen::Index>(i);
    r[row] = c * (l / lr - 1.0);
    if (J && l > 0.0) {
      const Vec2 g = c / lr * v / l;
      add(J, row, i, -g);
      add(J, row, k, g);
    }
  }
}

void bend_block(std::span<const Vec2> s, const Reference& ref, double w, Eigen::Index row0, Eigen::VectorXd& r,
                std::vector<Triplet>* J) {
  const std::size_t n = s.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t p = (j + n - 1) % n, q = (j + 1) % n;
    const double c = w * std::sqrt(0.5 * ref.span[j]);
    const double theta = interior_angle(s[p], s[j], s[q]);
    const Eigen::Index row = row0 + static_cast<Eigen::Index>(j);
    r[row] = c * (theta / ref.angle[j] - 1.0);
    if (J) {
      const double k = c / ref.angle[j];
      const Vec2 gp = -k * angle_gradient(s[j] - s[p]);
      const Vec2 gn = -k * angle_gradient(s[q] - s[j]);
      add(J, row, p, gp);
      add(J, row, q, gn);
      add(J, row, j, -(gp + gn));
    }
  }
}

std::vector<Vec2> gradient_from(const Eigen::VectorXd& r, const std::vector<Triplet>& trip, std::size_t n) {
  std::vector<Vec2> g(n, Vec2::Zero());
  for (const Triplet& t : trip) g[static_cast<std::size_t>(t.col() / 2)][t.col() % 2] += 2.0 * t.value() * r[t.row()];
  return g;
}

// Total registration residual: fit, then sqrt(kappa) stretch, then sqrt(beta) bend.
bool total_residual(std::span<const Vec2> s, const Reference& ref, const DistanceField& f, double kappa, double beta,
                    Eigen::VectorXd& r, std::vector<Triplet>* J) {
  const auto n = static_cast<Eigen::Index>(s.size());
  r.resize(3 * n);
  if (J) J->clear();
  if (!fit_block(s, f, 1.0, 0, r, J)) return false;
  stretch_block(s, ref, std::sqrt(kappa), n, r, J);
  bend_block(s, ref, std::sqrt(beta), 2 * n, r, J);
  return r.allFinite();
}

std::vector<Vec2> to_points(const Eigen::VectorXd& x) {
  std::vector<Vec2> out(static_cast<std::size_t>(x.size() / 2));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.segment<2>(static_cast<Eigen::Index>(2 * i));
  return out;
}

Eigen::VectorXd to_vector(std::span<const Vec2> pts) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(2 * pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) x.segment<2>(static_cast<Eigen::Index>(2 * i)) = pts[i];
  return x;
}

// Levenberg-Marquardt on the sparse registration residual.
std::vector<Vec2> deform(std::vector<Vec2> s, std::span<const Vec2> reference, const DistanceField& f, double kappa,
                         double beta, int max_iterations) {
  const Reference ref = reference_data(reference, false);
  const auto dim = static_cast<Eigen::Index>(2 * s.size());
  Eigen::VectorXd r, rn;
  std::vector<Triplet> trip;
  if (!total_residual(s, ref, f, kappa, beta, r, &trip)) return s;
  double F = r.squaredNorm();
  Eigen::SparseMatrix<double> J(r.size(), dim), I(dim, dim);
  I.setIdentity();
  auto linearize = [&](Eigen::SparseMatrix<double>& A, Eigen::VectorXd& g) {
    J.setFromTriplets(trip.begin(), trip.end());
    A = J.transpose() * J;
    g = J.transpose() * r;
  };
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd g;
  linearize(A, g);
  double mu = 1e-3 * A.diagonal().maxCoeff();
  if (!(mu > 0.0)) mu = 1e-3;
  double nu = 2.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  Eigen::VectorXd x = to_vector(s);
  for (int it = 0; it < max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
    const Eigen::SparseMatrix<double> M = A + mu * I;
    solver.compute(M);
    if (solver.info() != Eigen::Success) break;
    const Eigen::VectorXd h = solver.solve(-g);
    if (!h.allFinite() || h.lpNorm<Eigen::Infinity>() < 1e-9) break;
    const Eigen::VectorXd xn = x + h;
    const auto sn = to_points(xn);
    const bool ok = total_residual(sn, ref, f, kappa, beta, rn, nullptr);
    const double Fn = ok ? rn.squaredNorm() : std::numeric_limits<double>::infinity();
    const double predicted = h.dot(mu * h - g);
    const double rho = predicted > 0.0 ? (F - Fn) / predicted : -1.0;
    if (!(Fn < F) || !(rho > 0.0)) {
      mu *= nu;
      nu *= 2.0;
      continue;
    }
    const double rel = (F - Fn) / F;
    x = xn;
    s = sn;
    F = Fn;
    mu *= std::min(1.0, std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3)));
    nu = 2.0;
    if (rel < 1e-10) break;
    total_residual(s, ref, f, kappa, beta, r, &trip);
    linearize(A, g);
  }
  return s;
}

double registration_energy(std::span<const Vec2> s, std::span<const Vec2> ref, const DistanceField& f, double kappa,
                           double beta) {
  Eigen::VectorXd r;
  if (!total_residual(s, reference_data(ref, false), f, kappa, beta, r, nullptr))
    return std::numeric_limits<double>::infinity();
  return r.squaredNorm();
}

Vec2 area_centroid(std::span<const Vec2> pts) {
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % pts.size()];
    const double w = cross2(p, q);
    a += w;
    c += w * (p + q);
  }
  return c / (3.0 * a);
}

double polygon_area(std::span<const Vec2> pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) a += cross2(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * a;
}

// Best similarity placement of `shape` (scale, rotation, translation about its
// centroid) under the fit energy alone.
std::vector<Vec2> prealign(const std::vector<Vec2>& shape, const DistanceField& f) {
  const Vec2 c = area_centroid(shape);
  auto place = [&](const Eigen::VectorXd& q) {
    const double s = std::exp(q[0]);
    const Eigen::Rotation2Dd rot(q[1]);
    std::vector<Vec2> out(shape.size());
    for (std::size_t i = 0; i < shape.size(); ++i) out[i] = c + Vec2(q[2], q[3]) + s * (rot * (shape[i] - c));
    return out;
  };
  const ResidualFunction res = [&](const Eigen::VectorXd& q) {
    const auto pts = place(q);
    Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
    if (!fit_block(pts, f, 1.0, 0, r, nullptr)) r.setConstant(std::numeric_limits<double>::infinity());
    return r;
  };
  LmOptions o;
  o.delta = 1e-6;
  o.max_iterations = 200;
  o.cost_improvement_tol = 1e-9;
  o.step_norm_tol = 1e-9;
  const LmResult lm = minimize_residual(res, Eigen::VectorXd::Zero(4), o);
  return place(lm.x);
}

}  // namespace

double fit_energy(std::span<const Vec2> contour, const DistanceField& field) {
  if (contour.size() < 2) throw InputError("fit_energy: contour needs at least 2 vertices");
  Eigen::VectorXd r(static_cast<Eigen::Index>(contour.size()));
  if (!fit_block(contour, field, 1.0, 0, r, nullptr)) throw InputError("fit_energy: contour leaves the distance field");
  return r.squaredNorm();
}

double stretch_energy(std::span<const Vec2> contour, std::span<const Vec2> reference) {
  check_sizes(contour, reference);
  const Reference ref = reference_data(reference);
  Eigen::VectorXd r(static_cast<Eigen::Index>(contour.size()));
  stretch_block(contour, ref, 1.0, 0, r, nullptr);
  return r.squaredNorm();
}

double bend_energy(std::span<const Vec2> contour, std::span<const Vec2> reference) {
  check_sizes(contour, reference);
  const Reference ref = reference_data(reference);
  Eigen::VectorXd r(static_cast<Eigen::Index>(contour.size()));
  bend_block(contour, ref, 1.0, 0, r, nullptr);
  return r.squaredNorm();
}

std::vector<Vec2> fit_gradient(std::span<const Vec2> contour, const DistanceField& field) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(contour.size()));
  std::vector<Triplet> J;
  if (!fit_block(contour, field, 1.0, 0, r, &J)) throw InputError("fit_gradient: contour leaves the distance field");
  return gradient_from(r, J, contour.size());
}

std::vector<Vec2> stretch_gradient(std::span<const Vec2> contour, std::span<const Vec2> reference) {
  check_sizes(contour, reference);
  const Reference ref = reference_data(reference);
  Eigen::VectorXd r(static_cast<Eigen::Index>(contour.size()));
  std::vector<Triplet> J;
  stretch_block(contour, ref, 1.0, 0, r, &J);
  return gradient_from(r, J, contour.size());
}

std::vector<Vec2> bend_gradient(std::span<const Vec2> contour, std::span<const Vec2> reference) {
  check_sizes(contour, reference);
  const Reference ref = reference_data(reference);
  Eigen::VectorXd r(static_cast<Eigen::Index>(contour.size()));
  std::vector<Triplet> J;
  bend_block(contour, ref, 1.0, 0, r, &J);
  return gradient_from(r, J, contour.size());
}

Contour resample(const Contour& contour, double split, double merge) {
  contour.validate();
  if (!(merge > 0.0) || !(split > 2.0 * merge))
    throw InputError("resample: split threshold must exceed twice the merge threshold");
  Contour out;
  const std::size_t n = contour.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = contour.points[i];
    const Vec2& b = contour.points[(i + 1) % n];
    out.points.push_back(a);
    out.feature_ids.push_back(contour.feature_ids[i]);
    const double l = (b - a).norm();
    if (l <= split) continue;
    const int pieces = static_cast<int>(std::ceil(l / split - 1e-9));
    for (int k = 1; k < pieces; ++k) {
      out.points.push_back(a + (b - a) * (double(k) / pieces));
      out.feature_ids.emplace_back();
    }
  }
  bool changed = true;
  while (changed && out.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < out.size() && out.size() > 3; ++i) {
      if (out.is_feature(i)) continue;
      const std::size_t m = out.size();
      const Vec2& p = out.points[(i + m - 1) % m];
      const Vec2& q = out.points[(i + 1) % m];
      if ((out.points[i] - p).norm() < merge && (q - out.points[i]).norm() < merge) {
        out.points.erase(out.points.begin() + static_cast<std::ptrdiff_t>(i));
        out.feature_ids.erase(out.feature_ids.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
      }
    }
  }
  return out;
}

FittedContour register_contour(const ContourTemplate& tmpl, const Mask& mask, const RegistrationOptions& opts) {
  opts.validate();
  tmpl.validate();
  mask.validate();
  const DistanceField field = distance_field(mask);
  const double res = mask.resolution;

  // Work in cell units so the energy weights do not depend on the raster scale.
  DistanceField cells = field;
  cells.resolution = 1.0;
  cells.origin = Vec2::Zero();
  for (double& v : cells.values) v /= res;
  auto to_cells = [&](const Vec2& p) -> Vec2 { return (p - mask.origin) / res; };
  auto to_meters = [&](const Vec2& p) -> Vec2 { return mask.origin + res * p; };

  Contour shape = tmpl;
  if (polygon_area(shape.points) < 0.0) {
    std::reverse(shape.points.begin(), shape.points.end());
    std::reverse(shape.feature_ids.begin(), shape.feature_ids.end());
  }
  for (Vec2& p : shape.points) p = to_cells(p);


  Vec2 mask_centroid = Vec2::Zero();
  for (int j = 0; j < mask.height; ++j)
    for (int i = 0; i < mask.width; ++i)
      if (mask.at(i, j)) mask_centroid += Vec2(i + 0.5, j + 0.5);
  const double mask_area = static_cast<double>(mask.count());
  mask_centroid /= mask_area;
  const Vec2 tmpl_centroid = area_centroid(shape.points);
  const double half_diag = 0.5 * std::hypot(double(mask.width), double(mask.height));
  if ((tmpl_centroid - mask_centroid).norm() >= half_diag)
    throw RegistrationError("registration: template does not overlap the mask");

  if (opts.prealign) {
    const double s = std::sqrt(mask_area / std::abs(polygon_area(shape.points)));
    for (Vec2& p : shape.points) p = mask_centroid + s * (p - tmpl_centroid);
  }
  auto coarseness = [&](int outer) { return std::ldexp(1.0, std::max(0, opts.coarse_levels - (outer - 1))); };
  shape = resample(shape, coarseness(1) * opts.split_cells, coarseness(1) * opts.merge_cells);
  for (const Vec2& p : shape.points)
    if (!cells.contains(p)) throw RegistrationError("registration: template extends past the mask raster");
  if (opts.prealign) shape.points = prealign(shape.points, cells);

  FittedContour out;
  Contour ref = shape;
  double e_prev = fit_energy(shape.points, cells);
  Contour best = shape, best_ref = ref;
  double best_e = e_prev;
  int increases = 0;
  for (int outer = 1; outer <= opts.max_outer_iterations; ++outer) {
    out.outer_iterations = outer;
    shape.points = deform(shape.points, ref.points, cells, opts.kappa, opts.beta, opts.max_inner_iterations);
    const double e_lm = registration_energy(shape.points, ref.points, cells, opts.kappa, opts.beta);
    if (e_lm < best_e) {
      best = shape;
      best_ref = ref;
      best_e = e_lm;
    }
    const double rel = e_prev > 0.0 ? (e_prev - e_lm) / e_prev : 0.0;
    if (rel < opts.tolerance && coarseness(outer) == 1.0) {
      out.converged = true;
      break;
    }
    if (outer == opts.max_outer_iterations) break;
    shape = resample(shape, coarseness(outer + 1) * opts.split_cells, coarseness(outer + 1) * opts.merge_cells);
    ref = shape;
    const double e_next = fit_energy(shape.points, cells);
    increases = e_next > e_prev ? increases + 1 : 0;
    e_prev = e_next;
    if (increases >= 5) {
      out.warning = "registration energy increased for 5 consecutive iterations; returning the best contour";
      shape = best;
      ref = best_ref;
      break;
    }
  }

  out.contour = shape;
  out.reference = ref;
  for (Vec2& p : out.contour.points) p = to_meters(p);
  for (Vec2& p : out.reference.points) p = to_meters(p);
  out.features = out.contour.features();
  out.energies.fit = fit_energy(out.contour.points, field);
  out.energies.stretch = stretch_energy(out.contour.points, out.reference.points);
  out.energies.bend = bend_energy(out.contour.points, out.reference.points);
  return out;
}

}  // namespace foldopt
