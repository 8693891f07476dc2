#include "billiard/dynamics.hpp"

#include <cmath>
#include <string>

namespace billiard::dynamics {

using geometry::ray_cast;

PhasePoint PhasePoint::make(const Vec& position, const Vec& direction) {
  if (position.size() != direction.size())
    throw DomainError("phase point: position and direction sizes differ");
  if (std::abs(direction.norm() - 1.0) > 1e-10)
    throw DomainError("phase point: direction must have unit norm");
  return PhasePoint{position, direction.normalized()};
}

Vec PhasePoint::stacked() const {
  Vec s(2 * position.size());
  s << position, direction;
  return s;
}

PhasePoint PhasePoint::from_stacked(const Vec& state) {
  const auto n = state.size() / 2;
  return PhasePoint{state.head(n), state.tail(n)};
}

FlowResult flow_extended(const Scene& scene, const Vec& x, const Vec& xi, double t) {
  if (t < 0.0) throw DomainError("flow: time must be nonnegative");
  FlowResult out;
  Vec pos = x;
  Vec dir = xi;
  double remaining = t;
  while (true) {
    const auto hit = ray_cast(scene, pos, dir);
    if (!hit) {
      out.escaped = true;
      pos += remaining * dir;
      break;
    }
    if (hit->time > remaining + 1e-12) {
      pos += remaining * dir;
      break;
    }
    if (hit->cos_phi < kTangencyThreshold)
      throw DegenerateError("flow: tangential hit on obstacle " +
                            std::to_string(hit->obstacle + 1));
    pos = hit->point;
    dir = reflect(dir, hit->normal);
    remaining = std::max(0.0, remaining - hit->time);
    out.hits.push_back(*hit);
  }
  out.endpoint = PhasePoint{pos, dir};
  return out;
}

FlowResult flow(const Scene& scene, const PhasePoint& start, double t) {
  FlowResult r = flow_extended(scene, start.position, start.direction, t);
  r.endpoint.direction.normalize();
  return r;
}

namespace {

struct PhiEval {
  Vec state;
  int obstacle;
  double hit_time;
};

PhiEval phi_eval(const Scene& scene, const Vec& x, const Vec& xi, double lambda) {
  const double horizon = 2.0 * lambda;
  const auto hit = ray_cast(scene, x, xi);
  if (!hit || !(hit->time < horizon))
    throw DomainError("phi_map: no reflection before time 2*lambda");
  if (hit->cos_phi < kTangencyThreshold) throw DegenerateError("phi_map: tangential hit");
  const Vec eta = reflect(xi, hit->normal);
  const auto second = ray_cast(scene, hit->point, eta);
  if (second && second->time < horizon - hit->time)
    throw DomainError("phi_map: second reflection before time 2*lambda");
  const auto n = x.size();
  Vec out(2 * n);
  out << hit->point + (horizon - hit->time) * eta, -eta;
  return {out, hit->obstacle, hit->time};
}

}  // namespace

PhasePoint phi_map(const Scene& scene, const PhasePoint& sigma, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("phi_map: lambda must be positive");
  const Vec s = phi_eval(scene, sigma.position, sigma.direction, lambda).state;
  PhasePoint p = PhasePoint::from_stacked(s);
  p.direction.normalize();
  return p;
}

Vec phi_map_extended(const Scene& scene, const Vec& state, double lambda) {
  const auto n = state.size() / 2;
  return phi_eval(scene, state.head(n), state.tail(n), lambda).state;
}

Mat fd_jacobian(const PhaseMap& map, const Vec& point, double step) {
  if (!(step > 0.0)) throw DomainError("fd_jacobian: step must be positive");
  const Vec f0 = map(point);
  Mat jac(f0.size(), point.size());
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    Vec xp = point, xm = point;
    xp(k) += step;
    xm(k) -= step;
    jac.col(k) = (map(xp) - map(xm)) / (2.0 * step);
  }
  return jac;
}

namespace {

std::vector<int> itinerary(const FlowResult& r) {
  std::vector<int> it;
  for (const auto& h : r.hits) it.push_back(h.obstacle);
  return it;
}

}  // namespace

Mat flow_jacobian(const Scene& scene, const Vec& state, double t, double step) {
  const auto n = state.size() / 2;
  const FlowResult center = flow_extended(scene, state.head(n), state.tail(n), t);
  double elapsed = 0.0;
  for (const auto& h : center.hits) {
    elapsed += h.time;
    if (elapsed < 10.0 * step || elapsed > t - 10.0 * step)
      throw StencilError("flow_jacobian: reflection within 10*step of the time window ends");
  }
  const std::vector<int> ref = itinerary(center);
  auto map = [&](const Vec& s) {
    const FlowResult r = flow_extended(scene, s.head(n), s.tail(n), t);
    if (itinerary(r) != ref) throw StencilError("flow_jacobian: stencil changes itinerary");
    return r.endpoint.stacked();
  };
  return fd_jacobian(map, state, step);
}

Mat phi_map_jacobian(const Scene& scene, const Vec& state, double lambda, double step) {
  const auto n = state.size() / 2;
  const PhiEval center = phi_eval(scene, state.head(n), state.tail(n), lambda);
  if (center.hit_time < 10.0 * step || center.hit_time > 2.0 * lambda - 10.0 * step)
    throw StencilError("phi_map_jacobian: reflection within 10*step of the window ends");
  auto map = [&](const Vec& s) {
    const PhiEval e = phi_eval(scene, s.head(n), s.tail(n), lambda);
    if (e.obstacle != center.obstacle)
      throw StencilError("phi_map_jacobian: stencil hits a different obstacle");
    return e.state;
  };
  return fd_jacobian(map, state, step);
}

}  // namespace billiard::dynamics
