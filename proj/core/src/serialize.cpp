#include "hbe/error.hpp"
#include "hbe/index.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace hbe {

namespace {

constexpr char kMagic[4] = {'H', 'B', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      u8(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    u8(static_cast<std::uint8_t>(v));
  }

private:
  std::ostream& out_;
};

class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint8_t u8() {
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) throw FormatError("truncated index blob");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::uint32_t n = u32();
    if (n > (1u << 20)) throw FormatError("string field too long in index blob");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (static_cast<std::uint32_t>(in_.gcount()) != n) throw FormatError("truncated index blob");
    return s;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      std::uint8_t b = u8();
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return v;
    }
    throw FormatError("malformed varint in index blob");
  }

private:
  std::istream& in_;
};

} // namespace

void HbeIndex::serialize(std::ostream& out) const {
  Writer w(out);
  out.write(kMagic, 4);
  w.u32(kVersion);
  const auto& c = construction_;
  w.u8(static_cast<std::uint8_t>(scheme_tag(c.spec)));
  w.str(c.method);
  w.u8(static_cast<std::uint8_t>(c.kernel.kind));
  w.i32(c.kernel.p);
  if (const auto* e = std::get_if<EuclideanSpec>(&c.spec)) {
    w.f64(e->w);
    w.i32(e->D);
  } else {
    const auto& b = std::get<BallCarvingSpec>(c.spec);
    w.i32(b.t);
    w.f64(b.w);
    w.i32(b.D);
    w.i32(b.U);
  }
  for (double v : {c.R, c.beta, c.M, c.M_measured, c.clamp, c.hash_cost, c.gaussian_t}) w.f64(v);
  w.u8(static_cast<std::uint8_t>(c.variance.kind));
  for (double v : {c.variance.beta, c.variance.M, c.variance.t, c.variance.clamp, c.variance.factor}) w.f64(v);
  const std::size_t n = points_->n();
  const std::size_t N = num_tables();
  w.u64(n);
  w.u64(points_->d());
  w.u64(N);
  w.u64(master_seed_);
  w.u64(factors_.size());
  for (double f : factors_) w.f64(f);
  for (std::size_t t = 0; t < N; ++t) {
    std::uint64_t b0 = table_begin_[t], b1 = table_begin_[t + 1];
    w.u32(static_cast<std::uint32_t>(b1 - b0));
    for (std::uint64_t b = b0; b < b1; ++b) {
      std::size_t begin = bucket_start_[b];
      std::size_t end = (b + 1 < b1) ? bucket_start_[b + 1] : n;
      w.u64(bucket_fp_[b]);
      w.varint(end - begin);
      std::uint32_t prev = 0;
      for (std::size_t k = begin; k < end; ++k) {
        std::uint32_t id = ids_[t * n + k];
        w.varint(k == begin ? id : id - prev);
        prev = id;
      }
    }
  }
}

std::vector<unsigned char> HbeIndex::serialize() const {
  std::ostringstream os(std::ios::binary);
  serialize(os);
  const std::string s = os.str();
  return {s.begin(), s.end()};
}

HbeIndex HbeIndex::deserialize(std::istream& in, std::shared_ptr<const PointSet> points) {
  if (!points) throw InputError("index needs a point set");
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad index magic (expected HBE1)");
  Reader r(in);
  if (r.u32() != kVersion) throw FormatError("unsupported index version");
  HbeIndex idx;
  auto& c = idx.construction_;
  auto tag = static_cast<SchemeTag>(r.u8());
  c.method = r.str();
  c.kernel.kind = static_cast<KernelKind>(r.u8());
  c.kernel.p = r.i32();
  c.kernel.bandwidth = 1.0;
  if (tag == SchemeTag::Euclidean) {
    EuclideanSpec e;
    e.w = r.f64();
    e.D = r.i32();
    c.spec = e;
  } else if (tag == SchemeTag::BallCarving) {
    BallCarvingSpec b;
    b.t = r.i32();
    b.w = r.f64();
    b.D = r.i32();
    b.U = r.i32();
    c.spec = b;
  } else {
    throw FormatError("unknown scheme tag in index blob");
  }
  c.R = r.f64();
  c.beta = r.f64();
  c.M = r.f64();
  c.M_measured = r.f64();
  c.clamp = r.f64();
  c.hash_cost = r.f64();
  c.gaussian_t = r.f64();
  c.variance.kind = static_cast<VarianceKind>(r.u8());
  c.variance.beta = r.f64();
  c.variance.M = r.f64();
  c.variance.t = r.f64();
  c.variance.clamp = r.f64();
  c.variance.factor = r.f64();
  std::uint64_t n = r.u64(), d = r.u64(), N = r.u64();
  if (n != points->n() || d != points->d()) throw FormatError("index was built for a different point set shape");
  if (N == 0) throw FormatError("index blob has no tables");
  idx.points_ = std::move(points);
  idx.master_seed_ = r.u64();
  std::uint64_t nf = r.u64();
  if (nf != 0 && nf != n) throw FormatError("factor count mismatch in index blob");
  idx.factors_.resize(nf);
  for (auto& f : idx.factors_) f = r.f64();
  idx.p_fn_ = std::make_shared<CollisionModel>(c.spec);
  idx.table_begin_.assign(N + 1, 0);
  idx.ids_.resize(N * n);
  std::uint64_t total = 0;
  for (std::uint64_t t = 0; t < N; ++t) {
    idx.table_begin_[t] = total;
    std::uint32_t nb = r.u32();
    std::uint64_t pos = 0;
    for (std::uint32_t b = 0; b < nb; ++b) {
      idx.bucket_fp_.push_back(r.u64());
      idx.bucket_start_.push_back(static_cast<std::uint32_t>(pos));
      std::uint64_t size = r.varint();
      if (pos + size > n) throw FormatError("bucket sizes exceed the point count");
      std::uint64_t prev = 0;
      for (std::uint64_t k = 0; k < size; ++k) {
        std::uint64_t v = r.varint();
        std::uint64_t id = k == 0 ? v : prev + v;
        if (id >= n) throw FormatError("point id out of range in index blob");
        idx.ids_[t * n + pos + k] = static_cast<std::uint32_t>(id);
        prev = id;
      }
      pos += size;
    }
    if (pos != n) throw FormatError("table does not partition the point set");
    total += nb;
  }
  idx.table_begin_[N] = total;
  idx.regenerate_hashes();
  return idx;
}

} // namespace hbe
