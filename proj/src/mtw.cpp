#include "sphereot/mtw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sphereot/parallel.hpp"

namespace sphereot {

namespace {

void validate_query(const MTWQuery& q) {
  if (std::abs(q.xi.norm() - 1.0) > 1e-10 || std::abs(q.nu.norm() - 1.0) > 1e-10)
    throw ValidationError("mtw_value: xi and nu must be unit vectors");
  if (std::abs(q.xi.vec().dot(q.nu.vec())) > 1e-10)
    throw ValidationError("mtw_value: xi and nu must be orthogonal");
}

}  // namespace

double mtw_value(const MTWQuery& q, double t_step, double hess_step) {
  validate_query(q);
  const Frame frame(q.x);  // held fixed across the t-family
  const Vec xi_coords = frame.to_frame(q.xi.vec());
  auto h = [&](double t) {
    const SpherePoint y =
        exp_map(TangentVector(q.x, q.v0.vec() + t * q.nu.vec()));
    const Mat hess = cost_hess_x(q.x, y, frame, hess_step);
    return -xi_coords.dot(hess * xi_coords);
  };
  const double hp = h(t_step), h0 = h(0.0), hm = h(-t_step);
  return (hp - 2.0 * h0 + hm) / (t_step * t_step);
}

double mtw_value_richardson(const MTWQuery& q, double t_step, double hess_step) {
  const double coarse = mtw_value(q, t_step, hess_step);
  const double fine = mtw_value(q, 0.5 * t_step, hess_step);
  return (4.0 * fine - coarse) / 3.0;
}

MTWReport a3s_scan(int n, int samples, double cut_margin, std::uint64_t seed) {
  if (n < 1) throw ValidationError("a3s_scan: n must be >= 1");
  if (samples < 1) throw ValidationError("a3s_scan: samples must be >= 1");
  if (cut_margin < 0.2)
    throw ValidationError("a3s_scan: cut_margin must be >= 0.2 for FD stability");

  // draw all queries up front from a single stream, evaluate in parallel
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto gaussian_vec = [&](int dim) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
    return v;
  };
  std::vector<MTWQuery> queries;
  queries.reserve(static_cast<std::size_t>(samples));
  while (static_cast<int>(queries.size()) < samples) {
    const SpherePoint x{gaussian_vec(n + 1)};
    TangentVector dir(x, gaussian_vec(n + 1));
    if (dir.norm() < 1e-8) continue;
    const double len = unif(rng) * (M_PI - cut_margin);
    TangentVector v0(x, dir.vec() * (len / dir.norm()));
    TangentVector xi(x, gaussian_vec(n + 1));
    if (xi.norm() < 1e-8) continue;
    xi = TangentVector(x, xi.vec() / xi.norm());
    TangentVector nu(x, gaussian_vec(n + 1));
    Vec nu_perp = nu.vec() - nu.vec().dot(xi.vec()) * xi.vec();
    if (nu_perp.norm() < 1e-8) continue;
    nu = TangentVector(x, nu_perp / nu_perp.norm());
    queries.push_back({x, v0, xi, nu});
  }

  Vec values(samples);
  parallel_for(0, samples, [&](int s) {
    values(s) = mtw_value(queries[static_cast<std::size_t>(s)]);
  });

  MTWReport rep;
  rep.n = n;
  rep.samples = samples;
  rep.seed = seed;
  rep.cut_margin = cut_margin;
  rep.theta_obs = values.minCoeff();
  for (int s = 0; s < samples; ++s)
    if (values(s) <= 0.0)
      rep.failures.push_back({queries[static_cast<std::size_t>(s)], values(s)});
  std::vector<int> order(static_cast<std::size_t>(samples));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (values(a) != values(b)) return values(a) < values(b);
    return a < b;
  });
  const int keep = std::min(10, samples);
  for (int s = 0; s < keep; ++s)
    rep.smallest.push_back(
        {queries[static_cast<std::size_t>(order[static_cast<std::size_t>(s)])],
         values(order[static_cast<std::size_t>(s)])});
  return rep;
}

}  // namespace sphereot
