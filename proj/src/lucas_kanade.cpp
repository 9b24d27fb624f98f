#include <cmath>
#include <deque>

#include "voxflow/flow.hpp"

namespace voxflow {

LucasKanadeResult estimate_lucas_kanade(const Field2& first, const Field2& second, int window, double min_eigenvalue,
                                        int refinements) {
  if (window < 3 || window % 2 == 0) throw InvalidArgument("lucas_kanade: window must be odd and >= 3");
  if (!first.same_shape(second)) throw InvalidArgument("lucas_kanade: frame shapes differ");
  if (refinements < 1) throw InvalidArgument("lucas_kanade: refinements must be >= 1");
  const int ny = first.ny();
  const int nx = first.nx();
  const int r = window / 2;

  Field2 gx(ny, nx), gy(ny, nx);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      gx(y, x) = 0.5 * (first(y, std::min(x + 1, nx - 1)) - first(y, std::max(x - 1, 0)));
      gy(y, x) = 0.5 * (first(std::min(y + 1, ny - 1), x) - first(std::max(y - 1, 0), x));
    }

  LucasKanadeResult res;
  res.field = MotionField(1, ny, nx);
  res.accepted = Mask2(ny, nx, 0);
  Field2& u = res.field.levels[0].u;
  Field2& v = res.field.levels[0].v;

  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      double sxx = 0, sxy = 0, syy = 0;
      int n = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (!first.inside(yy, xx)) continue;
          sxx += gx(yy, xx) * gx(yy, xx);
          sxy += gx(yy, xx) * gy(yy, xx);
          syy += gy(yy, xx) * gy(yy, xx);
          ++n;
        }
      const double tr = 0.5 * (sxx + syy);
      const double det = sxx * syy - sxy * sxy;
      const double lmin = tr - std::sqrt(std::max(tr * tr - det, 0.0));
      if (!(lmin / n >= min_eigenvalue)) continue;

      double du = 0.0, dv = 0.0;
      for (int it = 0; it < refinements; ++it) {
        double bx = 0, by = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (!first.inside(yy, xx)) continue;
            const double warped = bilinear_sample(second, xx + du, yy + dv, OobPolicy::CLAMP);
            const double it_diff = warped - first(yy, xx);
            bx -= gx(yy, xx) * it_diff;
            by -= gy(yy, xx) * it_diff;
          }
        const double step_u = (syy * bx - sxy * by) / det;
        const double step_v = (sxx * by - sxy * bx) / det;
        du += step_u;
        dv += step_v;
        if (std::abs(step_u) + std::abs(step_v) < 1e-6) break;
      }
      if (!std::isfinite(du) || !std::isfinite(dv)) continue;
      u(y, x) = du;
      v(y, x) = dv;
      res.accepted(y, x) = 1;
    }
  }

  // Fill rejected pixels from the nearest accepted one (breadth-first, 4-neighbour).
  std::deque<std::pair<int, int>> queue;
  Mask2 seen = res.accepted;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      if (seen(y, x)) queue.emplace_back(y, x);
  res.all_rejected = queue.empty();
  while (!queue.empty()) {
    const auto [y, x] = queue.front();
    queue.pop_front();
    const int ny4[4] = {y - 1, y + 1, y, y};
    const int nx4[4] = {x, x, x - 1, x + 1};
    for (int k = 0; k < 4; ++k) {
      if (!seen.inside(ny4[k], nx4[k]) || seen(ny4[k], nx4[k])) continue;
      seen(ny4[k], nx4[k]) = 1;
      u(ny4[k], nx4[k]) = u(y, x);
      v(ny4[k], nx4[k]) = v(y, x);
      queue.emplace_back(ny4[k], nx4[k]);
    }
  }
  return res;
}

}  // namespace voxflow
