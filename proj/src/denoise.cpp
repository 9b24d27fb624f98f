#include "voxflow/denoise.hpp"

#include "voxflow/parallel.hpp"

namespace voxflow {

RadarVolume polarimetric_filter(const RadarVolume& vol, double rho_min) {
  if (!vol.has_rho_hv()) throw PreconditionViolation("polarimetric_filter: volume has no rho_hv");
  if (!(rho_min > 0.0 && rho_min <= 1.0)) throw InvalidArgument("polarimetric_filter: rho_min must be in (0,1]");
  RadarVolume out = vol;
  const auto& rho = vol.rho_hv();
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho[i] < rho_min) out.data()[i] = kNoEchoDbz;
  return out;
}

Mask2 erode_cross(const Mask2& m) {
  Mask2 out(m.ny(), m.nx(), 0);
  auto on = [&](int y, int x) { return m.inside(y, x) && m(y, x) != 0; };
  for (int y = 0; y < m.ny(); ++y)
    for (int x = 0; x < m.nx(); ++x)
      out(y, x) = on(y, x) && on(y - 1, x) && on(y + 1, x) && on(y, x - 1) && on(y, x + 1);
  return out;
}

Mask2 dilate_cross(const Mask2& m) {
  Mask2 out(m.ny(), m.nx(), 0);
  auto on = [&](int y, int x) { return m.inside(y, x) && m(y, x) != 0; };
  for (int y = 0; y < m.ny(); ++y)
    for (int x = 0; x < m.nx(); ++x)
      out(y, x) = on(y, x) || on(y - 1, x) || on(y + 1, x) || on(y, x - 1) || on(y, x + 1);
  return out;
}

Mask2 binary_open(const Mask2& m, int iters) {
  if (iters < 0) throw InvalidArgument("binary_open: negative iteration count");
  Mask2 r = m;
  for (int i = 0; i < iters; ++i) r = erode_cross(r);
  for (int i = 0; i < iters; ++i) r = dilate_cross(r);
  return r;
}

Field2 morphological_clean(const Field2& dbz, const MorphologyConfig& cfg) {
  if (cfg.open_iters < 0 || cfg.dilate_iters < 0)
    throw InvalidArgument("morphological_clean: negative iteration count");
  Mask2 echo(dbz.ny(), dbz.nx(), 0);
  Mask2 core(dbz.ny(), dbz.nx(), 0);
  for (std::size_t i = 0; i < dbz.size(); ++i) {
    echo[i] = dbz[i] > cfg.echo_dbz;
    core[i] = dbz[i] > cfg.protect_dbz;
  }
  const Mask2 kept = binary_open(echo, cfg.open_iters);
  Mask2 protect = core;
  for (int i = 0; i < cfg.dilate_iters; ++i) protect = dilate_cross(protect);

  Field2 out = dbz;
  for (std::size_t i = 0; i < dbz.size(); ++i)
    if (echo[i] && !kept[i] && !protect[i]) out[i] = kNoEchoDbz;
  return out;
}

RadarVolume morphological_clean(const RadarVolume& vol, const MorphologyConfig& cfg) {
  if (cfg.open_iters < 0 || cfg.dilate_iters < 0)
    throw InvalidArgument("morphological_clean: negative iteration count");
  RadarVolume out = vol;
  const int planes = vol.nt() * vol.nz();
  parallel_for(planes, [&](int p) {
    const int t = p / vol.nz();
    const int z = p % vol.nz();
    out.set_slice(t, z, morphological_clean(vol.slice(t, z), cfg));
  });
  return out;
}

}  // namespace voxflow
