#include "ctrig/lobachevsky.hpp"

#include "ctrig/detail/rk45.hpp"

#include <cmath>

namespace ctrig::lobachevsky {

Geodesic horizontal(const TrigTable& polar_table, const HorizontalParams& params) {
  if (!(params.lambda > 0)) throw std::invalid_argument("similarity scale must be positive");
  const double c0 = polar_table.cos_sin(params.theta_polar0).x();
  const double y0 = params.sign >= 0 ? params.lambda * c0 : -params.lambda * c0;
  if (!(y0 > 0)) throw std::invalid_argument("horizontal geodesic start lies in y <= 0");

  Geodesic geo;
  geo.kind = Geodesic::Kind::horizontal;
  auto rhs = [&](double tp) { return -polar_table.cos_sin(tp).x(); };
  detail::rk45_scalar_drive(
      rhs, params.theta_polar0, params.T, params.dt,
      [&](double t, double tp) {
        const Vec2 q = polar_table.cos_sin(tp);
        geo.t.push_back(t);
        geo.theta_polar.push_back(tp);
        if (params.sign >= 0)
          geo.xy.emplace_back(params.x0 - params.lambda * q.y(), params.lambda * q.x());
        else
          geo.xy.emplace_back(params.x0 + params.lambda * q.y(), -params.lambda * q.x());
      });
  return geo;
}

void recover_controls(const TrigPair& pair, Geodesic& geo) {
  geo.control.clear();
  geo.control.reserve(geo.theta_polar.size());
  for (double tp : geo.theta_polar) {
    const double theta = pair.theta_primal(tp);
    geo.control.push_back(pair.primal().cos_sin(theta));
  }
}

Geodesic vertical(const TrigPair& pair, const VerticalParams& params) {
  if (!(params.y0 > 0)) throw std::invalid_argument("vertical geodesic start lies in y <= 0");
  Geodesic geo;
  geo.kind = params.up ? Geodesic::Kind::vertical_up : Geodesic::Kind::vertical_down;
  const Vec2 dir(0, params.up ? 1 : -1);
  const auto sup = pair.support_set(dir);
  const double u2 = params.up ? sup.value : -sup.value;
  auto pick = [&](double t) {
    const double theta = params.selection ? params.selection(t, sup.theta) : sup.theta.mid();
    if (theta < sup.theta.lo - 1e-9 || theta > sup.theta.hi + 1e-9)
      throw std::invalid_argument("control selection leaves the support set");
    return pair.primal().cos_sin(theta);
  };
  // x(t) = x0 + y0 * integral of e^{u2 s} u1(s); trapezoid on the output grid
  double t = 0;
  double acc = 0;
  Vec2 u_prev = pick(0);
  geo.t.push_back(0);
  geo.xy.emplace_back(params.x0, params.y0);
  geo.control.push_back(u_prev);
  const int n = static_cast<int>(std::ceil(params.T / params.dt));
  for (int i = 1; i <= n; ++i) {
    const double tn = std::min(params.T, i * params.dt);
    const Vec2 u_cur = pick(tn);
    const double f_prev = std::exp(u2 * t) * u_prev.x();
    const double f_cur = std::exp(u2 * tn) * u_cur.x();
    acc += 0.5 * (f_prev + f_cur) * (tn - t);
    geo.t.push_back(tn);
    geo.xy.emplace_back(params.x0 + params.y0 * acc, params.y0 * std::exp(u2 * tn));
    geo.control.push_back(u_cur);
    t = tn;
    u_prev = u_cur;
  }
  return geo;
}

std::vector<double> fixed_points(const TrigTable& polar_table) {
  std::vector<double> out;
  for (double phi : {M_PI / 2, 3 * M_PI / 2}) out.push_back(polar_table.angle_at_direction(phi));
  return out;
}

}  // namespace ctrig::lobachevsky
