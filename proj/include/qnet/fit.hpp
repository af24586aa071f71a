#pragma once

// Least-squares fit of y = offset + amplitude * exp(-(x - center)^2 / (2 sigma^2)).
// For fixed (center, sigma) the model is linear in (offset, amplitude), so
// those are solved exactly and only the two nonlinear parameters are searched
// (coarse grid, then Nelder-Mead).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "qnet/error.hpp"

namespace qnet {

struct GaussianFit {
  double offset = 0.0;
  double amplitude = 0.0;  // negative for a dip
  double center = 0.0;
  double sigma = 0.0;
  double sse = 0.0;

  double fwhm() const { return 2.0 * std::sqrt(2.0 * std::numbers::ln2) * sigma; }
  // Dip depth relative to the baseline, i.e. the visibility of a dip.
  double relative_depth() const { return offset == 0.0 ? 0.0 : -amplitude / offset; }
};

namespace detail {

struct LinearSolve {
  double offset;
  double amplitude;
  double sse;
};

inline LinearSolve solve_linear(std::span<const double> x, std::span<const double> y, double mu, double sigma) {
  double s1 = 0, sg = 0, sgg = 0, sy = 0, sgy = 0;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = std::exp(-(x[i] - mu) * (x[i] - mu) * inv);
    s1 += 1.0;
    sg += g;
    sgg += g * g;
    sy += y[i];
    sgy += g * y[i];
  }
  const double det = s1 * sgg - sg * sg;
  LinearSolve r{sy / s1, 0.0, 0.0};
  if (std::abs(det) > 1e-300) {
    r.offset = (sgg * sy - sg * sgy) / det;
    r.amplitude = (s1 * sgy - sg * sy) / det;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = std::exp(-(x[i] - mu) * (x[i] - mu) * inv);
    const double res = y[i] - r.offset - r.amplitude * g;
    r.sse += res * res;
  }
  return r;
}

}  // namespace detail

inline GaussianFit fit_gaussian(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 4) throw Error(Errc::kInvalidArgument, "gaussian fit needs >= 4 points");
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double xmin = *xmin_it;
  const double xmax = *xmax_it;
  const double span = xmax - xmin;
  if (!(span > 0.0)) throw Error(Errc::kInvalidArgument, "gaussian fit needs distinct x values");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  double min_step = span;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] > sorted[i - 1]) min_step = std::min(min_step, sorted[i] - sorted[i - 1]);
  }

  auto cost = [&](double mu, double log_sigma) {
    return detail::solve_linear(x, y, mu, std::exp(log_sigma)).sse;
  };

  // Coarse grid over centers at the data points and log-spaced widths.
  double best_mu = x[0];
  double best_ls = std::log(span / 4.0);
  double best = std::numeric_limits<double>::infinity();
  const double ls_lo = std::log(min_step / 4.0);
  const double ls_hi = std::log(span);
  constexpr int kWidths = 40;
  for (double mu : sorted) {
    for (int k = 0; k <= kWidths; ++k) {
      const double ls = ls_lo + (ls_hi - ls_lo) * k / kWidths;
      const double c = cost(mu, ls);
      if (c < best) {
        best = c;
        best_mu = mu;
        best_ls = ls;
      }
    }
  }

  // Nelder-Mead refinement in (mu, log sigma).
  std::array<std::array<double, 2>, 3> simplex{
      {{best_mu, best_ls}, {best_mu + min_step, best_ls}, {best_mu, best_ls + 0.2}}};
  std::array<double, 3> f{};
  for (int i = 0; i < 3; ++i) f[static_cast<std::size_t>(i)] = cost(simplex[static_cast<std::size_t>(i)][0], simplex[static_cast<std::size_t>(i)][1]);
  for (int iter = 0; iter < 400; ++iter) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return f[static_cast<std::size_t>(a)] < f[static_cast<std::size_t>(b)]; });
    const auto& lo = simplex[static_cast<std::size_t>(order[0])];
    const auto& mid = simplex[static_cast<std::size_t>(order[1])];
    auto& hi = simplex[static_cast<std::size_t>(order[2])];
    double& fhi = f[static_cast<std::size_t>(order[2])];
    const double flo = f[static_cast<std::size_t>(order[0])];
    const double fmid = f[static_cast<std::size_t>(order[1])];
    if (std::abs(fhi - flo) <= 1e-14 * (std::abs(flo) + 1e-300) &&
        std::abs(hi[0] - lo[0]) < 1e-9 * (span + 1.0)) {
      break;
    }
    const std::array<double, 2> cen{(lo[0] + mid[0]) / 2.0, (lo[1] + mid[1]) / 2.0};
    auto along = [&](double t) { return std::array<double, 2>{cen[0] + t * (hi[0] - cen[0]), cen[1] + t * (hi[1] - cen[1])}; };
    const auto refl = along(-1.0);
    const double frefl = cost(refl[0], refl[1]);
    if (frefl < flo) {
      const auto exp_pt = along(-2.0);
      const double fexp = cost(exp_pt[0], exp_pt[1]);
      if (fexp < frefl) {
        hi = exp_pt;
        fhi = fexp;
      } else {
        hi = refl;
        fhi = frefl;
      }
    } else if (frefl < fmid) {
      hi = refl;
      fhi = frefl;
    } else {
      const auto con = along(frefl < fhi ? -0.5 : 0.5);
      const double fcon = cost(con[0], con[1]);
      if (fcon < std::min(fhi, frefl)) {
        hi = con;
        fhi = fcon;
      } else {
        for (int i : {order[1], order[2]}) {
          auto& p = simplex[static_cast<std::size_t>(i)];
          p = {lo[0] + 0.5 * (p[0] - lo[0]), lo[1] + 0.5 * (p[1] - lo[1])};
          f[static_cast<std::size_t>(i)] = cost(p[0], p[1]);
        }
      }
    }
  }
  std::size_t bi = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (f[i] < f[bi]) bi = i;
  }
  const double mu = simplex[bi][0];
  const double sigma = std::exp(simplex[bi][1]);
  const auto lin = detail::solve_linear(x, y, mu, sigma);
  return GaussianFit{lin.offset, lin.amplitude, mu, sigma, lin.sse};
}

}  // namespace qnet
