#include "foldopt/clothsim.hpp"

#include "foldopt/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>

namespace foldopt {

void SimParams::validate() const {
  if (!(timestep > 0.0)) throw InputError("SimParams: timestep must be positive");
  if (!(friction_mu >= 0.0)) throw InputError("SimParams: friction_mu must be non-negative");
  if (!(shear_stiffness >= 0.0) || !(stretch_stiffness >= 0.0) || !(bend_stiffness >= 0.0))
    throw InputError("SimParams: stiffnesses must be non-negative");
  if (!(damping >= 0.0)) throw InputError("SimParams: damping must be non-negative");
  if (!(areal_density > 0.0)) throw InputError("SimParams: areal_density must be positive");
  if (substeps < 1) throw InputError("SimParams: substeps must be at least 1");
  if (!std::isfinite(gravity) || !std::isfinite(table_height) || !std::isfinite(table_tilt))
    throw InputError("SimParams: non-finite value");
}

Vec3 SimParams::gravity_vector() const {
  return gravity * Vec3(-std::sin(table_tilt), 0.0, -std::cos(table_tilt));
}

double GraspConstraint::curve_parameter(double t) const {
  const double s = std::clamp((t - start_time) / duration, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

Vec3 GraspConstraint::target(std::size_t index, double t) const {
  Vec3 p = evaluate(trajectory, curve_parameter(t));
  if (!offsets.empty()) p += offsets[index];
  return p;
}

SimState make_state(const TriangleMesh& mesh) {
  return {mesh, std::vector<Vec3>(mesh.vertices.size(), Vec3::Zero()), 0.0};
}

namespace {

using Index = std::uint32_t;

struct StretchTerm {
  Index a, b;
  double rest;
  double inv_rest;
  double compliance;
};

struct AreaTerm {
  Index a, b, c;
  double rest;
  double inv_rest;
  double compliance;
};

// Isometric bending stencil of one interior edge: C = sum_k coeff[k] * x[ids[k]]
// vanishes on any planar configuration and equals |e| * theta * n for a small
// hinge rotation theta.
struct BendTerm {
  Index ids[4];  // wing1, wing2, edge0, edge1
  double coeff[4];
  double compliance;
};

constexpr double kContactSlack = 1e-9;
constexpr double kStackThickness = 1e-3;
constexpr double kStackHeight = 0.02;

}  // namespace

struct ClothSimulator::Impl {
  SimParams params;
  TriangleMesh topology;
  std::vector<Index> particle_of;
  std::vector<Index> vertex_of;
  std::vector<Vec3> x, v, x_prev;
  std::vector<double> inv_mass, base_inv_mass;
  double total_mass = 0.0;
  std::vector<StretchTerm> stretch;
  std::vector<double> stretch_lambda;
  std::vector<AreaTerm> area;
  std::vector<BendTerm> bend;
  double stack_radius = 0.0;
  std::vector<Index> near, cell_items;
  std::vector<std::size_t> cell_start, cell_fill;
  std::vector<std::pair<Index, Index>> stack_pairs;
  std::vector<GraspConstraint> constraints;
  // per constraint, per vertex: particle index
  std::vector<std::vector<Index>> grasp_particles;
  std::vector<char> pinned;
  double time = 0.0;

  Impl(const TriangleMesh& mesh, const SimParams& p) : params(p), topology(mesh) {
    params.validate();
    mesh.validate();
    build_particles(mesh);
    build_terms(mesh);
    update_compliances();
  }

  void build_particles(const TriangleMesh& mesh) {
    const std::size_t n = mesh.vertices.size();
    particle_of.assign(n, 0);
    std::set<std::size_t> welded;
    const std::size_t half = mesh.layer_vertex_count();
    if (mesh.two_sided)
      for (std::size_t b : boundary_vertices(mesh)) welded.insert(b);
    std::vector<Vec3> rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (mesh.two_sided && i >= half && welded.count(i - half)) {
        // Welded pair: the particle takes the lower-layer copy's position.
        const Index p = particle_of[i - half];
        particle_of[i] = p;
        x[p] = mesh.vertices[i];
        rest[p] = mesh.rest_vertices[i];
        continue;
      }
      particle_of[i] = static_cast<Index>(x.size());
      vertex_of.push_back(static_cast<Index>(i));
      x.push_back(mesh.vertices[i]);
      rest.push_back(mesh.rest_vertices[i]);
    }
    rest_positions = std::move(rest);
    v.assign(x.size(), Vec3::Zero());
    x_prev = x;

    std::vector<double> mass(x.size(), 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const double m = params.areal_density * rest_area(mesh, t) / 3.0;
      for (std::size_t k : mesh.triangles[t]) mass[particle_of[k]] += m;
    }
    base_inv_mass.resize(x.size());
    total_mass = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) {
      base_inv_mass[p] = mass[p] > 0.0 ? 1.0 / mass[p] : 0.0;
      total_mass += mass[p];
    }
    inv_mass = base_inv_mass;
    pinned.assign(x.size(), 0);
  }

  std::vector<Vec3> rest_positions;
  std::vector<double> stretch_area;
  std::vector<double> bend_weight;

  void build_terms(const TriangleMesh& mesh) {
    std::map<std::pair<Index, Index>, double> edges;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      const double a3 = rest_area(mesh, t) / 3.0;
      Index p[3] = {particle_of[tri[0]], particle_of[tri[1]], particle_of[tri[2]]};
      for (int k = 0; k < 3; ++k) {
        Index a = p[k], b = p[(k + 1) % 3];
        if (a > b) std::swap(a, b);
        edges[{a, b}] += a3;
      }
      const Vec3& ra = rest_positions[p[0]];
      const Vec3& rb = rest_positions[p[1]];
      const Vec3& rc = rest_positions[p[2]];
      const double a0 = 0.5 * (rb - ra).cross(rc - ra).norm();
      area.push_back({p[0], p[1], p[2], a0, 1.0 / a0, 0.0});
    }
    for (const auto& [key, a] : edges) {
      const double len = (rest_positions[key.second] - rest_positions[key.first]).norm();
      if (len <= 0.0) continue;
      stretch.push_back({key.first, key.second, len, 1.0 / len, 0.0});
      stretch_area.push_back(a);
    }
    stretch_lambda.assign(stretch.size(), 0.0);

    // Bending across interior edges of each layer.
    const std::size_t layers = mesh.two_sided ? 2 : 1;
    const std::size_t per_layer = mesh.layer_triangle_count();
    for (std::size_t layer = 0; layer < layers; ++layer) {
      std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::size_t, int>>> adj;
      for (std::size_t t = layer * per_layer; t < (layer + 1) * per_layer; ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
          std::size_t a = tri[k], b = tri[(k + 1) % 3];
          adj[{std::min(a, b), std::max(a, b)}].push_back({t, k});
        }
      }
      for (const auto& [key, list] : adj) {
        if (list.size() != 2) continue;
        const auto& t1 = mesh.triangles[list[0].first];
        const auto& t2 = mesh.triangles[list[1].first];
        const int k1 = list[0].second;
        // t1 = (edge0, edge1, wing1) in cyclic order
        const std::size_t e0 = t1[k1], e1 = t1[(k1 + 1) % 3], w1 = t1[(k1 + 2) % 3];
        const int k2 = list[1].second;
        const std::size_t w2 = t2[(k2 + 2) % 3];
        const Index ids[4] = {particle_of[w1], particle_of[w2], particle_of[e0], particle_of[e1]};
        const Vec3& o = rest_positions[ids[2]];
        const Vec3 e = rest_positions[ids[3]] - o;
        const double el = e.norm();
        if (el <= 0.0) continue;
        const Vec3 eh = e / el;
        const Vec3 r1 = rest_positions[ids[0]] - o;
        const Vec3 r2 = rest_positions[ids[1]] - o;
        const double s1 = r1.dot(eh), s2 = r2.dot(eh);
        const double d1 = (r1 - s1 * eh).norm(), d2 = (r2 - s2 * eh).norm();
        if (d1 <= 0.0 || d2 <= 0.0) continue;
        BendTerm term{{ids[0], ids[1], ids[2], ids[3]}, {el / d1, el / d2, 0.0, 0.0}, 0.0};
        term.coeff[3] = -(term.coeff[0] * s1 + term.coeff[1] * s2) / el;
        term.coeff[2] = -(term.coeff[0] + term.coeff[1]) - term.coeff[3];
        const double areas = rest_area(mesh, list[0].first) + rest_area(mesh, list[1].first);
        bend.push_back(term);
        // Energy k/2 * 3|e|^2/(A1+A2) * theta^2 in the small-angle limit.
        bend_weight.push_back(3.0 / areas);
      }
    }

    double edge_sum = 0.0;
    for (const StretchTerm& e : stretch) edge_sum += e.rest;
    if (!stretch.empty()) stack_radius = 0.75 * edge_sum / static_cast<double>(stretch.size());
  }

  void update_compliances() {
    auto compliance = [](double stiffness, double weight) {
      return stiffness > 0.0 ? 1.0 / (stiffness * weight) : std::numeric_limits<double>::infinity();
    };
    for (std::size_t i = 0; i < stretch.size(); ++i)
      stretch[i].compliance = compliance(params.stretch_stiffness, stretch_area[i]);
    for (AreaTerm& t : area) t.compliance = compliance(params.shear_stiffness, t.rest);
    for (std::size_t i = 0; i < bend.size(); ++i)
      bend[i].compliance = compliance(params.bend_stiffness, bend_weight[i]);
  }

  void set_constraints(std::vector<GraspConstraint> cs) {
    for (const GraspConstraint& c : cs) {
      if (!(c.duration > 0.0)) throw InputError("GraspConstraint: duration must be positive");
      if (c.vertex_ids.empty()) throw InputError("GraspConstraint: empty vertex set");
      if (!c.offsets.empty() && c.offsets.size() != c.vertex_ids.size())
        throw InputError("GraspConstraint: offsets must match vertex_ids");
      for (std::size_t id : c.vertex_ids)
        if (id >= particle_of.size()) throw InputError("GraspConstraint: invalid vertex id");
    }
    constraints = std::move(cs);
    grasp_particles.clear();
    for (const GraspConstraint& c : constraints) {
      std::vector<Index> ps;
      for (std::size_t id : c.vertex_ids) ps.push_back(particle_of[id]);
      grasp_particles.push_back(std::move(ps));
    }
  }

  void apply_pins(double t) {
    std::fill(pinned.begin(), pinned.end(), 0);
    for (std::size_t c = 0; c < constraints.size(); ++c) {
      if (!constraints[c].active_at(t)) continue;
      for (std::size_t k = 0; k < grasp_particles[c].size(); ++k) {
        const Index p = grasp_particles[c][k];
        pinned[p] = 1;
        x[p] = constraints[c].target(k, t);
      }
    }
    for (std::size_t p = 0; p < x.size(); ++p) inv_mass[p] = pinned[p] ? 0.0 : base_inv_mass[p];
  }

  bool in_contact(Index p) const {
    return params.table_enabled && x[p].z() <= params.table_height + kContactSlack;
  }

  // Two Gauss-Seidel sweeps per substep with accumulated multipliers, so the
  // compliance is honored independently of the sweep count.
  void project_stretch(double inv_h2) {
    for (std::size_t i = 0; i < stretch.size(); ++i) {
      const StretchTerm& s = stretch[i];
      const double wa = inv_mass[s.a], wb = inv_mass[s.b];
      const double w = wa + wb;
      if (w == 0.0) continue;
      const Vec3 d = x[s.b] - x[s.a];
      const double len = d.norm();
      if (len < 1e-14) continue;
      const double c = (len - s.rest) * s.inv_rest;
      const double g2 = w * s.inv_rest * s.inv_rest;
      const double alpha = s.compliance * inv_h2;
      const double dl = (-c - alpha * stretch_lambda[i]) / (g2 + alpha);
      stretch_lambda[i] += dl;
      const Vec3 corr = (dl * s.inv_rest / len) * d;
      x[s.a] -= wa * corr;
      x[s.b] += wb * corr;
    }
  }

  void project_area(double inv_h2) {
    if (!(params.shear_stiffness > 0.0)) return;
    for (const AreaTerm& t : area) {
      const double wa = inv_mass[t.a], wb = inv_mass[t.b], wc = inv_mass[t.c];
      if (wa + wb + wc == 0.0) continue;
      const Vec3& a = x[t.a];
      const Vec3& b = x[t.b];
      const Vec3& c = x[t.c];
      const Vec3 n = (b - a).cross(c - a);
      const double nn = n.norm();
      if (nn < 1e-18) continue;
      const Vec3 ga = n.cross(c - b);
      const Vec3 gb = n.cross(a - c);
      const Vec3 gc = n.cross(b - a);
      // dC/dx_a = q * ga, and likewise for b and c.
      const double q = 0.5 * t.inv_rest / nn;
      const double cval = (0.5 * nn - t.rest) * t.inv_rest;
      const double g2 = q * q * (wa * ga.squaredNorm() + wb * gb.squaredNorm() + wc * gc.squaredNorm());
      const double dl = -cval / (g2 + t.compliance * inv_h2) * q;
      x[t.a] += wa * dl * ga;
      x[t.b] += wb * dl * gb;
      x[t.c] += wc * dl * gc;
    }
  }

  void project_bend(double inv_h2) {
    if (!(params.bend_stiffness > 0.0)) return;
    for (const BendTerm& t : bend) {
      double w[4];
      double g2 = 0.0;
      Vec3 c = Vec3::Zero();
      for (int k = 0; k < 4; ++k) {
        w[k] = inv_mass[t.ids[k]];
        g2 += w[k] * t.coeff[k] * t.coeff[k];
        c += t.coeff[k] * x[t.ids[k]];
      }
      if (g2 == 0.0) continue;
      const Vec3 dl = -c / (g2 + t.compliance * inv_h2);
      for (int k = 0; k < 4; ++k) x[t.ids[k]] += (w[k] * t.coeff[k]) * dl;
    }
  }

  // Cloth lying on other parts of itself: particles that are far apart on the
  // garment but nearly coincide in the table plane are kept a contact
  // thickness apart vertically. Candidate pairs are gathered once per step.
  void collect_stack_pairs() {
    stack_pairs.clear();
    if (stack_radius <= 0.0 || !params.table_enabled) return;
    // Only cloth lying near the table stacks; lifted or hanging parts are left
    // alone.
    const double ceiling = params.table_height + kStackHeight;
    const double reach = 1.5 * stack_radius;
    const double reach_z = kStackThickness + 5e-3;
    near.clear();
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (std::size_t p = 0; p < x.size(); ++p) {
      if (x[p].z() > ceiling) continue;
      near.push_back(static_cast<Index>(p));
      x0 = std::min(x0, x[p].x());
      y0 = std::min(y0, x[p].y());
      x1 = std::max(x1, x[p].x());
      y1 = std::max(y1, x[p].y());
    }
    if (near.size() < 2) return;
    const double inv_cell = 1.0 / reach;
    const auto nx = static_cast<std::size_t>((x1 - x0) * inv_cell) + 1;
    const auto ny = static_cast<std::size_t>((y1 - y0) * inv_cell) + 1;
    auto cell_of = [&](Index p) {
      const auto cx = std::min(nx - 1, static_cast<std::size_t>((x[p].x() - x0) * inv_cell));
      const auto cy = std::min(ny - 1, static_cast<std::size_t>((x[p].y() - y0) * inv_cell));
      return cy * nx + cx;
    };
    cell_start.assign(nx * ny + 1, 0);
    for (Index p : near) ++cell_start[cell_of(p) + 1];
    for (std::size_t c = 0; c < nx * ny; ++c) cell_start[c + 1] += cell_start[c];
    cell_items.resize(near.size());
    cell_fill.assign(cell_start.begin(), cell_start.end() - 1);
    for (Index p : near) cell_items[cell_fill[cell_of(p)]++] = p;

    const double excl2 = 4.0 * stack_radius * stack_radius;
    for (Index p : near) {
      const std::size_t c = cell_of(p);
      const std::size_t cx = c % nx, cy = c / nx;
      for (std::size_t gy = cy > 0 ? cy - 1 : 0; gy <= std::min(ny - 1, cy + 1); ++gy) {
        for (std::size_t gx = cx > 0 ? cx - 1 : 0; gx <= std::min(nx - 1, cx + 1); ++gx) {
          const std::size_t g = gy * nx + gx;
          for (std::size_t k = cell_start[g]; k < cell_start[g + 1]; ++k) {
            const Index q = cell_items[k];
            if (q <= p) continue;
            const Vec3 d = x[q] - x[p];
            if (d.x() * d.x() + d.y() * d.y() > reach * reach || std::abs(d.z()) > reach_z) continue;
            const Vec3 r = rest_positions[q] - rest_positions[p];
            if (r.x() * r.x() + r.y() * r.y() < excl2) continue;
            if (d.z() >= 0.0)
              stack_pairs.push_back({p, q});
            else
              stack_pairs.push_back({q, p});
          }
        }
      }
    }
  }

  void project_stacking(bool with_friction) {
    const double mu = params.self_friction_mu;
    const double r2 = stack_radius * stack_radius;
    for (const auto& [lower, upper] : stack_pairs) {
      const double dx = x[upper].x() - x[lower].x();
      const double dy = x[upper].y() - x[lower].y();
      if (dx * dx + dy * dy >= r2) continue;
      const double gap = x[upper].z() - x[lower].z();
      if (gap >= kStackThickness) continue;
      const double wu = inv_mass[upper];
      const double wl = in_contact(lower) ? 0.0 : inv_mass[lower];
      const double w = wu + wl;
      if (w == 0.0) continue;
      const double depth = kStackThickness - gap;
      x[upper].z() += wu / w * depth;
      x[lower].z() -= wl / w * depth;
      if (!with_friction) continue;
      const double rx = (x[upper].x() - x_prev[upper].x()) - (x[lower].x() - x_prev[lower].x());
      const double ry = (x[upper].y() - x_prev[upper].y()) - (x[lower].y() - x_prev[lower].y());
      const double rl = std::hypot(rx, ry);
      if (rl == 0.0) continue;
      const double k = rl <= mu * depth ? 1.0 : mu * depth / rl;
      x[upper].x() -= k * wu / w * rx;
      x[upper].y() -= k * wu / w * ry;
      x[lower].x() += k * wl / w * rx;
      x[lower].y() += k * wl / w * ry;
    }
  }

  void project_contact(bool with_friction) {
    if (!params.table_enabled) return;
    const double floor = params.table_height;
    const double mu = params.friction_mu;
    for (std::size_t p = 0; p < x.size(); ++p) {
      if (inv_mass[p] == 0.0) continue;
      Vec3& q = x[p];
      if (q.z() >= floor) continue;
      const double depth = floor - q.z();
      q.z() = floor;
      if (!with_friction) continue;
      const double tx = q.x() - x_prev[p].x();
      const double ty = q.y() - x_prev[p].y();
      const double tl = std::hypot(tx, ty);
      if (tl <= mu * depth) {
        q.x() = x_prev[p].x();
        q.y() = x_prev[p].y();
      } else {
        const double k = mu * depth / tl;
        q.x() -= k * tx;
        q.y() -= k * ty;
      }
    }
  }

  void step() {
    const int sub = params.substeps;
    const double h = params.timestep / sub;
    const double inv_h2 = 1.0 / (h * h);
    const Vec3 g = params.gravity_vector();
    const double damp = 1.0 / (1.0 + params.damping * h);
    collect_stack_pairs();
    for (int s = 0; s < sub; ++s) {
      const double t = time + (s + 1) * h;
      x_prev = x;
      apply_pins(t);
      for (std::size_t p = 0; p < x.size(); ++p) {
        if (pinned[p]) continue;
        v[p] = (v[p] + h * g) * damp;
        x[p] = x_prev[p] + h * v[p];
      }
      std::fill(stretch_lambda.begin(), stretch_lambda.end(), 0.0);
      project_stretch(inv_h2);
      project_stretch(inv_h2);
      project_area(inv_h2);
      project_bend(inv_h2);
      project_contact(true);
      project_stacking(true);
      project_contact(false);
      for (std::size_t p = 0; p < x.size(); ++p) v[p] = (x[p] - x_prev[p]) / h;
    }
    time += params.timestep;
    for (std::size_t p = 0; p < x.size(); ++p) {
      if (!x[p].allFinite() || !v[p].allFinite()) throw SimulationDiverged(vertex_of[p], time);
    }
  }
};

ClothSimulator::ClothSimulator(const TriangleMesh& mesh, const SimParams& params)
    : impl_(std::make_unique<Impl>(mesh, params)) {}
ClothSimulator::~ClothSimulator() = default;
ClothSimulator::ClothSimulator(ClothSimulator&&) noexcept = default;
ClothSimulator& ClothSimulator::operator=(ClothSimulator&&) noexcept = default;

void ClothSimulator::set_constraints(std::vector<GraspConstraint> constraints) {
  impl_->set_constraints(std::move(constraints));
}

void ClothSimulator::set_velocities(std::span<const Vec3> per_vertex) {
  if (per_vertex.size() != impl_->particle_of.size()) throw InputError("set_velocities: size mismatch");
  std::vector<int> count(impl_->x.size(), 0);
  for (Vec3& vel : impl_->v) vel.setZero();
  for (std::size_t i = 0; i < per_vertex.size(); ++i) {
    impl_->v[impl_->particle_of[i]] += per_vertex[i];
    ++count[impl_->particle_of[i]];
  }
  for (std::size_t p = 0; p < impl_->v.size(); ++p) impl_->v[p] /= count[p];
}

void ClothSimulator::set_params(const SimParams& params) {
  params.validate();
  impl_->params = params;
  impl_->update_compliances();
}

void ClothSimulator::step() { impl_->step(); }
double ClothSimulator::time() const { return impl_->time; }
void ClothSimulator::set_time(double t) { impl_->time = t; }

std::vector<Vec3> ClothSimulator::positions() const {
  std::vector<Vec3> out(impl_->particle_of.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = impl_->x[impl_->particle_of[i]];
  return out;
}

std::vector<Vec3> ClothSimulator::velocities() const {
  std::vector<Vec3> out(impl_->particle_of.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = impl_->v[impl_->particle_of[i]];
  return out;
}

TriangleMesh ClothSimulator::mesh() const {
  TriangleMesh m = impl_->topology;
  m.vertices = positions();
  return m;
}

SimState ClothSimulator::state() const { return {mesh(), velocities(), impl_->time}; }

double ClothSimulator::max_speed() const {
  double best = 0.0;
  for (const Vec3& vel : impl_->v) best = std::max(best, vel.norm());
  return best;
}

double ClothSimulator::specific_kinetic_energy() const {
  double e = 0.0;
  for (std::size_t p = 0; p < impl_->v.size(); ++p)
    if (impl_->base_inv_mass[p] > 0.0) e += 0.5 * impl_->v[p].squaredNorm() / impl_->base_inv_mass[p];
  return e / impl_->total_mass;
}

Vec3 ClothSimulator::centroid() const { return foldopt::centroid(positions()); }
std::size_t ClothSimulator::particle_count() const { return impl_->x.size(); }

SimState step(const SimState& state, const SimParams& params, std::span<const GraspConstraint> constraints) {
  ClothSimulator sim(state.mesh, params);
  sim.set_velocities(state.velocities);
  sim.set_time(state.time);
  sim.set_constraints({constraints.begin(), constraints.end()});
  sim.step();
  return sim.state();
}

TriangleMesh simulate_fold(const TriangleMesh& mesh, const SimParams& params,
                           std::span<const GraspConstraint> constraints, double settle_time,
                           const SimObserver& observer) {
  if (settle_time < 0.0) throw InputError("simulate_fold: negative settle time");
  double end = 0.0;
  for (const GraspConstraint& c : constraints) {
    for (std::size_t k = 0; k < c.vertex_ids.size(); ++k) {
      if (c.vertex_ids[k] >= mesh.vertices.size()) throw InputError("simulate_fold: invalid grasp vertex");
      const Vec3 start = c.target(k, c.start_time);
      if ((start - mesh.vertices[c.vertex_ids[k]]).norm() > 5e-3)
        throw InputError("simulate_fold: trajectory does not start at its grasp vertex");
    }
    end = std::max(end, c.start_time + c.duration);
  }
  ClothSimulator sim(mesh, params);
  sim.set_constraints({constraints.begin(), constraints.end()});
  const auto steps = static_cast<long>(std::llround((end + settle_time) / params.timestep));
  for (long i = 0; i < steps; ++i) {
    sim.step();
    if (observer) observer(sim);
  }
  return sim.mesh();
}

bool slides_at(const TriangleMesh& mesh, const SimParams& params, double tilt) {
  SimParams p = params;
  p.table_tilt = tilt;
  p.table_enabled = true;
  ClothSimulator sim(place_on_table(mesh, p.table_height), p);
  const Vec3 start = sim.centroid();
  const double limit = 0.05 * bounding_diagonal(mesh);
  const auto steps = static_cast<long>(std::llround(2.0 / p.timestep));
  for (long i = 1; i <= steps; ++i) {
    sim.step();
    if (i % 50 != 0) continue;
    if ((sim.centroid() - start).norm() > limit) return true;
    // Stuck: static friction holds everywhere.
    if (sim.time() >= 0.2 && sim.max_speed() < 1e-7) return false;
  }
  return (sim.centroid() - start).norm() > limit;
}

SlideResult tilt_table_slide_angle(const TriangleMesh& mesh, const SimParams& params, double angle_resolution) {
  if (!(angle_resolution > 0.0)) throw InputError("tilt_table_slide_angle: resolution must be positive");
  const double max_angle = deg_to_rad(89.0);
  double lo = angle_resolution;
  if (slides_at(mesh, params, lo)) return {lo, false};
  double hi = max_angle;
  if (!slides_at(mesh, params, hi)) return {max_angle, true};
  while (hi - lo > angle_resolution) {
    const double mid = 0.5 * (lo + hi);
    if (slides_at(mesh, params, mid))
      hi = mid;
    else
      lo = mid;
  }
  return {hi, false};
}

HangLengths hang_lengths(const TriangleMesh& mesh, const SimParams& params, std::size_t pick_vertex) {
  if (pick_vertex >= mesh.vertices.size()) throw InputError("hang_lengths: invalid pick vertex");
  SimParams p = params;
  p.table_enabled = false;
  p.table_tilt = 0.0;
  // The hanging equilibrium does not depend on damping; extra damping only
  // shortens the run.
  p.damping = std::max(p.damping, 10.0);
  const Vec3 anchor = mesh.vertices[pick_vertex];
  GraspConstraint hold;
  hold.vertex_ids = {pick_vertex, mesh.mirror_of(pick_vertex)};
  if (hold.vertex_ids[0] == hold.vertex_ids[1]) hold.vertex_ids.pop_back();
  for (std::size_t id : hold.vertex_ids) hold.offsets.push_back(mesh.vertices[id] - anchor);
  hold.trajectory = {{anchor, anchor, anchor, anchor}};
  constexpr double kMaxHang = 12.0;
  hold.duration = kMaxHang + 1.0;

  ClothSimulator sim(mesh, p);
  sim.set_constraints({hold});
  const auto steps = static_cast<long>(std::llround(kMaxHang / p.timestep));
  for (long i = 1; i <= steps; ++i) {
    sim.step();
    if (i % 100 == 0 && sim.time() > 1.0 && sim.max_speed() < 1e-3) break;
  }
  const std::vector<Vec3> pos = sim.positions();
  std::size_t lowest = 0;
  for (std::size_t i = 1; i < pos.size(); ++i)
    if (pos[i].z() < pos[lowest].z()) lowest = i;
  HangLengths out;
  out.lowest_vertex = lowest;
  out.hanging = (pos[pick_vertex] - pos[lowest]).norm();
  out.flat = (mesh.rest_vertices[pick_vertex] - mesh.rest_vertices[lowest]).norm();
  return out;
}

TriangleMesh place_on_table(const TriangleMesh& mesh, double table_height) {
  double lo = std::numeric_limits<double>::infinity();
  for (const Vec3& p : mesh.vertices) lo = std::min(lo, p.z());
  TriangleMesh out = mesh;
  for (Vec3& p : out.vertices) p.z() += table_height - lo;
  return out;
}

std::vector<std::size_t> grasp_neighborhood(const TriangleMesh& mesh, std::size_t center, double radius) {
  if (center >= mesh.vertices.size()) throw InputError("grasp_neighborhood: invalid vertex");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    if ((mesh.vertices[i] - mesh.vertices[center]).norm() <= radius) out.push_back(i);
  return out;
}

}  // namespace foldopt
