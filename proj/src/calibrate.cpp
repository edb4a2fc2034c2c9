#include "foldopt/calibrate.hpp"

#include "foldopt/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace foldopt {

void MaterialMeasurement::validate() const {
  auto finite = [](double v, const char* name) {
    if (!std::isfinite(v)) throw InputError(std::string("measurement: ") + name + " is not finite");
  };
  finite(L1, "L1");
  finite(L2, "L2");
  finite(H_s, "H_s");
  finite(L_t, "L_t");
  if (!(L2 > 0.0)) throw InputError("measurement: L2 must be positive");
  if (L1 < L2) throw InputError("measurement: L1 must not be shorter than L2");
  if (!(L_t > 0.0)) throw InputError("measurement: L_t must be positive");
  if (H_s < 0.0) throw InputError("measurement: H_s must be non-negative");
  if (H_s > L_t) throw InputError("measurement: H_s exceeds L_t");
}

double shear_fraction(double L1, double L2) {
  if (!(L2 > 0.0)) throw InputError("shear_fraction: L2 must be positive");
  if (L1 < L2) throw InputError("shear_fraction: L1 must not be shorter than L2");
  return (L1 - L2) / L2;
}

double friction_angle(double H_s, double L_t) {
  if (!(L_t > 0.0)) throw InputError("friction_angle: L_t must be positive");
  if (H_s < 0.0) throw InputError("friction_angle: H_s must be non-negative");
  if (H_s > L_t) throw InputError("friction_angle: H_s exceeds L_t");
  return std::asin(H_s / L_t);
}

ShearCalibration calibrate_shear(double target_fraction, const TriangleMesh& mesh, std::size_t pick_vertex,
                                 const SimParams& params) {
  if (!(target_fraction > 0.0) || !(target_fraction < 0.2))
    throw InputError("calibrate_shear: target fraction must lie in (0, 0.2)");
  ShearCalibration out;
  auto fraction_at = [&](double k) {
    SimParams p = params;
    p.stretch_stiffness = k;
    const HangLengths h = hang_lengths(mesh, p, pick_vertex);
    ++out.simulations;
    return (h.hanging - h.flat) / h.flat;
  };
  auto close = [&](double f) { return std::abs(f - target_fraction) < 0.1 * target_fraction; };

  // The fraction decreases with stiffness.
  double lo = std::log(kMinStiffness), hi = std::log(kMaxStiffness);
  const double f_hi = fraction_at(kMaxStiffness);
  if (f_hi >= target_fraction || close(f_hi)) {
    out.stiffness = kMaxStiffness;
    out.fraction = f_hi;
    out.saturated = !close(f_hi);
    return out;
  }
  const double f_lo = fraction_at(kMinStiffness);
  if (f_lo <= target_fraction || close(f_lo)) {
    out.stiffness = kMinStiffness;
    out.fraction = f_lo;
    out.saturated = !close(f_lo);
    return out;
  }
  double best_k = kMaxStiffness, best_f = f_hi;
  for (int it = 0; it < kCalibrationIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double k = std::exp(mid);
    const double f = fraction_at(k);
    if (std::abs(f - target_fraction) < std::abs(best_f - target_fraction)) {
      best_k = k;
      best_f = f;
    }
    if (close(f)) break;
    if (f > target_fraction)
      lo = mid;
    else
      hi = mid;
  }
  out.stiffness = best_k;
  out.fraction = best_f;
  out.saturated = !close(best_f);
  return out;
}

FrictionCalibration calibrate_friction(double target_angle, const TriangleMesh& mesh, const SimParams& params) {
  if (!(target_angle > 0.0) || !(target_angle < deg_to_rad(45.0)))
    throw InputError("calibrate_friction: target angle must lie in (0, 45) degrees");
  FrictionCalibration out;
  auto slides = [&](double mu) {
    SimParams p = params;
    p.friction_mu = mu;
    ++out.simulations;
    return slides_at(mesh, p, target_angle);
  };
  double lo = 0.0, hi = kMaxFrictionMu;
  if (!slides(lo)) {
    out.saturated = true;
    return out;
  }
  if (slides(hi)) {
    out.mu = out.mu_slides = out.mu_holds = hi;
    out.saturated = true;
    return out;
  }
  for (int it = 0; it < kCalibrationIterations; ++it) {
    if (std::atan(hi) - std::atan(lo) < deg_to_rad(0.25)) break;
    const double mid = 0.5 * (lo + hi);
    if (slides(mid))
      lo = mid;
    else
      hi = mid;
  }
  out.mu_slides = lo;
  out.mu_holds = hi;
  out.mu = 0.5 * (lo + hi);
  out.saturated = std::atan(hi) - std::atan(lo) >= deg_to_rad(0.25);
  return out;
}

SimParams MaterialCard::apply(SimParams base) const {
  base.stretch_stiffness = stretch_stiffness;
  base.friction_mu = friction_mu;
  base.validate();
  return base;
}

MaterialCard calibrate_garment(const std::string& garment, const MaterialMeasurement& m, const TriangleMesh& mesh,
                               std::size_t pick_vertex, const SimParams& params) {
  m.validate();
  MaterialCard card;
  card.garment = garment;
  card.measurement = m;
  card.shear_fraction = shear_fraction(m.L1, m.L2);
  const double angle = friction_angle(m.H_s, m.L_t);
  card.friction_angle_deg = rad_to_deg(angle);
  const ShearCalibration s = calibrate_shear(card.shear_fraction, mesh, pick_vertex, params);
  card.stretch_stiffness = s.stiffness;
  card.shear_saturated = s.saturated;
  const FrictionCalibration f = calibrate_friction(angle, mesh, params);
  card.friction_mu = f.mu;
  card.friction_saturated = f.saturated;
  return card;
}

std::string card_to_json(const MaterialCard& c) {
  nlohmann::json j;
  j["garment"] = c.garment;
  j["measurement"] = {{"L1", c.measurement.L1}, {"L2", c.measurement.L2}, {"H_s", c.measurement.H_s},
                      {"L_t", c.measurement.L_t}};
  j["shear_fraction"] = c.shear_fraction;
  j["friction_angle_deg"] = c.friction_angle_deg;
  j["stretch_stiffness"] = c.stretch_stiffness;
  j["friction_mu"] = c.friction_mu;
  j["shear_saturated"] = c.shear_saturated;
  j["friction_saturated"] = c.friction_saturated;
  j["simulator"] = c.simulator;
  return j.dump(2);
}

MaterialCard card_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    MaterialCard c;
    c.garment = j.at("garment").get<std::string>();
    const auto& m = j.at("measurement");
    c.measurement = {m.at("L1").get<double>(), m.at("L2").get<double>(), m.at("H_s").get<double>(),
                     m.at("L_t").get<double>()};
    c.shear_fraction = j.at("shear_fraction").get<double>();
    c.friction_angle_deg = j.at("friction_angle_deg").get<double>();
    c.stretch_stiffness = j.at("stretch_stiffness").get<double>();
    c.friction_mu = j.at("friction_mu").get<double>();
    c.shear_saturated = j.value("shear_saturated", false);
    c.friction_saturated = j.value("friction_saturated", false);
    c.simulator = j.value("simulator", std::string());
    if (!(c.stretch_stiffness > 0.0) || !(c.friction_mu >= 0.0))
      throw InputError("material card: stiffness must be positive and friction non-negative");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("material card: ") + e.what());
  }
}

void save_card(const std::string& path, const MaterialCard& card) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << card_to_json(card) << '\n';
}

MaterialCard load_card(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read material card " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return card_from_json(ss.str());
}

std::vector<NamedMeasurement> measurements_from_json(const std::string& text) {
  std::vector<NamedMeasurement> out;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& g : j.at("garments")) {
      NamedMeasurement n;
      n.garment = g.at("name").get<std::string>();
      n.measurement = {g.at("L1").get<double>(), g.at("L2").get<double>(), g.at("H_s").get<double>(),
                       g.at("L_t").get<double>()};
      out.push_back(std::move(n));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("measurements: ") + e.what());
  }
  if (out.empty()) throw InputError("measurements: no garments");
  for (const auto& n : out) {
    try {
      n.measurement.validate();
    } catch (const InputError& e) {
      throw InputError(n.garment + ": " + e.what());
    }
  }
  return out;
}

std::string measurements_to_json(const std::vector<NamedMeasurement>& list) {
  nlohmann::json j;
  j["garments"] = nlohmann::json::array();
  for (const auto& n : list)
    j["garments"].push_back({{"name", n.garment},
                             {"L1", n.measurement.L1},
                             {"L2", n.measurement.L2},
                             {"H_s", n.measurement.H_s},
                             {"L_t", n.measurement.L_t}});
  return j.dump(2);
}

}  // namespace foldopt
