#include "voxflow/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace voxflow {

namespace {

static_assert(std::endian::native == std::endian::little, "RVOL I/O assumes a little-endian host");

constexpr char kRvolMagic[4] = {'R', 'V', 'O', 'L'};
constexpr char kRhoMagic[4] = {'R', 'H', 'O', 'H'};
constexpr char kMotionMagic[4] = {'R', 'M', 'F', '1'};
constexpr std::uint8_t kRvolVersion = 1;
constexpr std::uint8_t kInvalidCode = 255;
// Largest accepted dimension product, guards against absurd headers.
constexpr std::uint64_t kMaxCells = 1ULL << 34;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void f32(float v) { bytes(&v, 4); }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open " + path.string());
  }
  void bytes(void* p, std::size_t n, const char* field) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError(field, "truncated file");
  }
  std::uint8_t u8(const char* field) {
    std::uint8_t v;
    bytes(&v, 1, field);
    return v;
  }
  std::uint32_t u32(const char* field) {
    std::uint32_t v;
    bytes(&v, 4, field);
    return v;
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
};

}  // namespace

std::uint8_t quantize_dbz(double dbz) {
  const double v = std::round((dbz + 32.0) * 2.0);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 254.0));
}

double dequantize_dbz(std::uint8_t v) { return v / 2.0 - 32.0; }

void write_rvol(const std::filesystem::path& path, const RadarVolume& vol, RvolDtype dtype) {
  vol.validate();
  Writer w(path);
  w.bytes(kRvolMagic, 4);
  w.u8(kRvolVersion);
  const Shape4& s = vol.shape();
  w.u32(static_cast<std::uint32_t>(s.t));
  w.u32(static_cast<std::uint32_t>(s.z));
  w.u32(static_cast<std::uint32_t>(s.y));
  w.u32(static_cast<std::uint32_t>(s.x));
  w.u8(static_cast<std::uint8_t>(dtype));
  w.u32(static_cast<std::uint32_t>(std::lround(vol.dt())));
  for (double a : vol.z_levels()) w.f32(static_cast<float>(a));

  const std::size_t plane = static_cast<std::size_t>(s.y) * s.x;
  if (dtype == RvolDtype::F32) {
    std::vector<float> buf(vol.data().size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const std::size_t z = (i / plane) % static_cast<std::size_t>(s.z);
      buf[i] = vol.mask()[z][i % plane] ? static_cast<float>(vol.data()[i]) : std::numeric_limits<float>::quiet_NaN();
    }
    w.bytes(buf.data(), buf.size() * sizeof(float));
  } else {
    std::vector<std::uint8_t> buf(vol.data().size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const std::size_t z = (i / plane) % static_cast<std::size_t>(s.z);
      buf[i] = vol.mask()[z][i % plane] ? quantize_dbz(vol.data()[i]) : kInvalidCode;
    }
    w.bytes(buf.data(), buf.size());
  }
  if (vol.has_rho_hv()) {
    w.bytes(kRhoMagic, 4);
    std::vector<std::uint8_t> buf(vol.rho_hv().size());
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] = static_cast<std::uint8_t>(std::clamp(std::round(vol.rho_hv()[i] * 200.0), 0.0, 200.0));
    w.bytes(buf.data(), buf.size());
  }
  w.finish(path);
}

RadarVolume read_rvol(const std::filesystem::path& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kRvolMagic, 4) != 0) throw FormatError("magic", "not an RVOL file");
  const std::uint8_t version = r.u8("version");
  if (version != kRvolVersion) throw FormatError("version", "unsupported version " + std::to_string(version));
  Shape4 s;
  const std::uint32_t t = r.u32("T"), z = r.u32("Z"), y = r.u32("Y"), x = r.u32("X");
  if (t == 0) throw FormatError("T", "must be >= 1");
  if (z == 0) throw FormatError("Z", "must be >= 1");
  if (y == 0) throw FormatError("Y", "must be >= 1");
  if (x == 0) throw FormatError("X", "must be >= 1");
  if (static_cast<std::uint64_t>(t) * z * y * x > kMaxCells) throw FormatError("X", "volume too large");
  s = {static_cast<int>(t), static_cast<int>(z), static_cast<int>(y), static_cast<int>(x)};
  const std::uint8_t dtype = r.u8("dtype");
  if (dtype > 1) throw FormatError("dtype", "unknown dtype " + std::to_string(dtype));
  const std::uint32_t dt = r.u32("dt_seconds");
  if (dt == 0) throw FormatError("dt_seconds", "must be positive");
  std::vector<double> alt(z);
  for (auto& a : alt) {
    float f;
    r.bytes(&f, 4, "altitudes");
    a = f;
  }
  for (std::size_t i = 1; i < alt.size(); ++i)
    if (!(alt[i] > alt[i - 1])) throw FormatError("altitudes", "not strictly increasing");

  RadarVolume vol(s, alt, static_cast<double>(dt));
  const std::size_t n = s.count();
  const std::size_t plane = static_cast<std::size_t>(s.y) * s.x;
  std::vector<std::uint8_t> valid(n, 1);
  if (dtype == 0) {
    std::vector<float> buf(n);
    r.bytes(buf.data(), n * sizeof(float), "payload");
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(buf[i])) {
        valid[i] = 0;
        vol.data()[i] = kNoEchoDbz;
      } else {
        vol.data()[i] = buf[i];
      }
    }
  } else {
    std::vector<std::uint8_t> buf(n);
    r.bytes(buf.data(), n, "payload");
    for (std::size_t i = 0; i < n; ++i) {
      if (buf[i] == kInvalidCode) {
        valid[i] = 0;
        vol.data()[i] = kNoEchoDbz;
      } else {
        vol.data()[i] = dequantize_dbz(buf[i]);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i]) continue;
    const std::size_t zi = (i / plane) % static_cast<std::size_t>(s.z);
    vol.level_mask(static_cast<int>(zi))[i % plane] = 0;
  }

  if (!r.at_end()) {
    char chunk[4];
    r.bytes(chunk, 4, "chunk");
    if (std::memcmp(chunk, kRhoMagic, 4) != 0) throw FormatError("chunk", "unknown trailing chunk");
    std::vector<std::uint8_t> buf(n);
    r.bytes(buf.data(), n, "RHOH");
    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (buf[i] > 200) throw FormatError("RHOH", "value above 200");
      rho[i] = buf[i] / 200.0;
    }
    vol.set_rho_hv(std::move(rho));
    if (!r.at_end()) throw FormatError("chunk", "unexpected data after RHOH");
  }
  return vol;
}

void write_motion(const std::filesystem::path& path, const MotionField& mf) {
  if (mf.nz() == 0) throw InvalidArgument("write_motion: empty motion field");
  Writer w(path);
  w.bytes(kMotionMagic, 4);
  w.u32(static_cast<std::uint32_t>(mf.nz()));
  w.u32(static_cast<std::uint32_t>(mf.ny()));
  w.u32(static_cast<std::uint32_t>(mf.nx()));
  for (const auto& l : mf.levels) {
    for (const Field2* f : {&l.u, &l.v}) {
      std::vector<float> buf(f->size());
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>((*f)[i]);
      w.bytes(buf.data(), buf.size() * sizeof(float));
    }
  }
  w.finish(path);
}

MotionField read_motion(const std::filesystem::path& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMotionMagic, 4) != 0) throw FormatError("magic", "not an RMF1 file");
  const std::uint32_t z = r.u32("Z"), y = r.u32("Y"), x = r.u32("X");
  if (z == 0) throw FormatError("Z", "must be >= 1");
  if (y == 0) throw FormatError("Y", "must be >= 1");
  if (x == 0) throw FormatError("X", "must be >= 1");
  if (static_cast<std::uint64_t>(z) * y * x > kMaxCells) throw FormatError("X", "field too large");
  MotionField mf(static_cast<int>(z), static_cast<int>(y), static_cast<int>(x));
  for (auto& l : mf.levels) {
    for (Field2* f : {&l.u, &l.v}) {
      std::vector<float> buf(f->size());
      r.bytes(buf.data(), buf.size() * sizeof(float), "payload");
      for (std::size_t i = 0; i < buf.size(); ++i) {
        if (!std::isfinite(buf[i])) throw FormatError("payload", "non-finite motion vector");
        (*f)[i] = buf[i];
      }
    }
  }
  if (!r.at_end()) throw FormatError("payload", "unexpected trailing data");
  return mf;
}

}  // namespace voxflow
