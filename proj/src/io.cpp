#include "sparkmri/io.hpp"

#include <cstring>
#include <fstream>

namespace sparkmri {

namespace {

constexpr char kMagic[4] = {'K', 'S', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}
void put_u64(std::string& buf, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}
void put_f64(std::string& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(buf, bits);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  void need(std::size_t n, const char* field) {
    if (pos + n > buf.size())
      throw std::runtime_error(std::string("container: truncated file while reading ") + field);
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return x;
  }
  std::uint64_t u64(const char* field) {
    need(8, field);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return x;
  }
  double f64(const char* field) {
    const std::uint64_t bits = u64(field);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
};

}  // namespace

Container Container::from_tensor(const ComplexTensor& t, Kind kind) {
  Container c;
  c.kind = kind;
  c.dtype = kComplex128;
  for (auto d : t.dims) c.dims.push_back(static_cast<std::uint64_t>(d));
  c.cvalues = t.v;
  return c;
}

Container Container::from_real(const RealTensor& t, Kind kind) {
  Container c;
  c.kind = kind;
  c.dtype = kFloat64;
  for (auto d : t.dims) c.dims.push_back(static_cast<std::uint64_t>(d));
  c.rvalues = t.v;
  return c;
}

Container Container::from_mask(const SamplingMask& m) {
  Container c;
  c.kind = kMask;
  c.dtype = kUint8;
  c.dims = {static_cast<std::uint64_t>(m.n_pe), static_cast<std::uint64_t>(m.n_pa)};
  c.bvalues = m.grid;
  return c;
}

ComplexTensor Container::to_tensor() const {
  if (dtype != kComplex128) throw std::runtime_error("container: dtype is not complex128");
  ComplexTensor t(std::vector<std::int64_t>(dims.begin(), dims.end()));
  t.v = cvalues;
  return t;
}

RealTensor Container::to_real() const {
  if (dtype != kFloat64) throw std::runtime_error("container: dtype is not float64");
  RealTensor t(std::vector<std::int64_t>(dims.begin(), dims.end()));
  t.v = rvalues;
  return t;
}

void write_container(const std::string& path, const Container& c) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, c.kind);
  put_u32(buf, static_cast<std::uint32_t>(c.dims.size()));
  for (auto d : c.dims) put_u64(buf, d);
  put_u32(buf, c.dtype);
  const std::uint64_t n = c.element_count();
  switch (c.dtype) {
    case Container::kComplex128:
      if (c.cvalues.size() != n) throw std::runtime_error("container: payload length mismatch");
      for (const auto& z : c.cvalues) {
        put_f64(buf, z.real());
        put_f64(buf, z.imag());
      }
      break;
    case Container::kFloat64:
      if (c.rvalues.size() != n) throw std::runtime_error("container: payload length mismatch");
      for (double d : c.rvalues) put_f64(buf, d);
      break;
    case Container::kUint8:
      if (c.bvalues.size() != n) throw std::runtime_error("container: payload length mismatch");
      buf.append(reinterpret_cast<const char*>(c.bvalues.data()), c.bvalues.size());
      break;
    default:
      throw std::runtime_error("container: unknown dtype " + std::to_string(c.dtype));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("container: cannot open for writing: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("container: write failed: " + path);
}

Container read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("container: cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r{buf};

  r.need(4, "magic");
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw std::runtime_error("container: bad magic (expected KSPC)");
  r.pos = 4;
  const std::uint32_t version = r.u32("version");
  if (version != kVersion)
    throw std::runtime_error("container: unsupported version " + std::to_string(version));
  Container c;
  c.kind = r.u32("kind");
  const std::uint32_t rank = r.u32("rank");
  for (std::uint32_t i = 0; i < rank; ++i) c.dims.push_back(r.u64("dims"));
  c.dtype = r.u32("dtype");
  const std::uint64_t n = c.element_count();
  switch (c.dtype) {
    case Container::kComplex128: {
      r.need(n * 16, "payload");
      c.cvalues.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double re = r.f64("payload");
        const double im = r.f64("payload");
        c.cvalues.emplace_back(re, im);
      }
      break;
    }
    case Container::kFloat64: {
      r.need(n * 8, "payload");
      c.rvalues.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) c.rvalues.push_back(r.f64("payload"));
      break;
    }
    case Container::kUint8: {
      r.need(n, "payload");
      c.bvalues.assign(buf.begin() + static_cast<std::ptrdiff_t>(r.pos),
                       buf.begin() + static_cast<std::ptrdiff_t>(r.pos + n));
      r.pos += n;
      break;
    }
    default:
      throw std::runtime_error("container: unknown dtype " + std::to_string(c.dtype));
  }
  if (r.pos != buf.size()) throw std::runtime_error("container: trailing bytes after payload");
  return c;
}

void export_pgm(const RealTensor& image, const std::string& path, double lo, double hi) {
  if (image.rank() != 2) throw std::invalid_argument("export_pgm: image must be rank 2");
  if (lo == 0.0 && hi == 0.0) {
    double m = 0.0;
    for (double v : image.v) m = std::max(m, v);
    hi = m;
  }
  if (hi <= lo) throw std::invalid_argument("export_pgm: window hi must exceed lo");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("export_pgm: cannot open for writing: " + path);
  f << "P5\n" << image.dims[1] << " " << image.dims[0] << "\n255\n";
  std::string payload;
  payload.reserve(static_cast<std::size_t>(image.size()));
  for (double v : image.v) {
    const double t = (v - lo) / (hi - lo) * 255.0;
    const int q = static_cast<int>(t + 0.5);
    payload.push_back(static_cast<char>(q < 0 ? 0 : (q > 255 ? 255 : q)));
  }
  f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!f) throw std::runtime_error("export_pgm: write failed: " + path);
}

}  // namespace sparkmri
