#include "blpcs/cipher.hpp"

#include "blpcs/binary_io.hpp"
#include "blpcs/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace blpcs {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& name, const std::string& text) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw FormatError("key file: bad value for " + name + ": '" + text + "'");
  return v;
}

}  // namespace

std::size_t BlpKey::K() const {
  return static_cast<std::size_t>(std::nearbyint(sr * static_cast<double>(M)));
}

void validate(const BlpKey& key) {
  if (key.M < 2 || key.M % 2 != 0) throw ShapeError("key: M must be even and at least 2");
  if (!(key.sr > 0.0 && key.sr <= 1.0)) throw ShapeError("key: sr must lie in (0, 1]");
  if (key.K() < 1) throw ShapeError("key: round(sr * M) must be at least 1");
  if (!std::isfinite(key.alpha) || !std::isfinite(key.beta)) throw ShapeError("key: alpha and beta must be finite");
  if (key.dmax < 1) throw ShapeError("key: dmax must be at least 1");
  if (key.mix_region > key.M / 2) throw ShapeError("key: mix_region exceeds M / 2");
  if (key.mix_count > 0 && key.mix_region == 0) throw ShapeError("key: mixes need a non-empty region");
}

BlpKey keygen(std::uint64_t seed, std::size_t M, double sr, double alpha, double beta, int dmax,
              std::size_t mix_count, std::size_t mix_region, bool scramble) {
  BlpKey key;
  key.seed = KeySeed{seed};
  key.M = M;
  key.sr = sr;
  key.alpha = alpha;
  key.beta = beta;
  key.dmax = dmax;
  key.mix_count = mix_count;
  key.mix_region = mix_region == 0 ? M / 8 : mix_region;
  key.scramble = scramble;
  validate(key);
  return key;
}

BlpKey without_permutation(BlpKey key) {
  key.scramble = false;
  return key;
}

std::string serialize_key(const BlpKey& key) {
  std::string s;
  s += "seed=" + std::to_string(key.seed.value) + "\n";
  s += "M=" + std::to_string(key.M) + "\n";
  s += "sr=" + format_double(key.sr) + "\n";
  s += "alpha=" + format_double(key.alpha) + "\n";
  s += "beta=" + format_double(key.beta) + "\n";
  s += "dmax=" + std::to_string(key.dmax) + "\n";
  s += "mix_region=" + std::to_string(key.mix_region) + "\n";
  s += "mix_count=" + std::to_string(key.mix_count) + "\n";
  if (!key.scramble) s += "scramble=0\n";
  return s;
}

BlpKey parse_key(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("key file: line without '=': " + line);
    const std::string name = line.substr(0, eq);
    if (!kv.emplace(name, line.substr(eq + 1)).second) throw FormatError("key file: duplicate field " + name);
  }
  static const char* required[] = {"seed", "M", "sr", "alpha", "beta", "dmax", "mix_region", "mix_count"};
  for (const char* r : required)
    if (!kv.count(r)) throw FormatError(std::string("key file: missing field ") + r);
  for (const auto& [name, value] : kv) {
    bool known = name == "scramble";
    for (const char* r : required) known = known || name == r;
    if (!known) throw FormatError("key file: unknown field " + name);
  }
  BlpKey key;
  key.seed = KeySeed{parse_number<std::uint64_t>("seed", kv["seed"])};
  key.M = parse_number<std::size_t>("M", kv["M"]);
  key.sr = parse_number<double>("sr", kv["sr"]);
  key.alpha = parse_number<double>("alpha", kv["alpha"]);
  key.beta = parse_number<double>("beta", kv["beta"]);
  key.dmax = parse_number<int>("dmax", kv["dmax"]);
  key.mix_region = parse_number<std::size_t>("mix_region", kv["mix_region"]);
  key.mix_count = parse_number<std::size_t>("mix_count", kv["mix_count"]);
  if (kv.count("scramble")) {
    const int s = parse_number<int>("scramble", kv["scramble"]);
    if (s != 0 && s != 1) throw FormatError("key file: scramble must be 0 or 1");
    key.scramble = s == 1;
  }
  try {
    validate(key);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("key file: ") + e.what());
  }
  return key;
}

void save_key(const std::string& path, const BlpKey& key) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << serialize_key(key);
  if (!out) throw FormatError("write failed: " + path);
}

BlpKey load_key(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key(ss.str());
}

std::vector<ColumnMix> sample_mixes(RandStream& stream, const IndexRegion& region, std::size_t count,
                                    const Permutation& perm) {
  std::vector<std::size_t> pool = region.indices();
  if (2 * count > pool.size()) throw ShapeError("sample_mixes: region too small for the requested mixes");
  // Partial Fisher-Yates: the first 2 * count slots become a uniform sample.
  for (std::size_t i = 0; i < 2 * count; ++i) {
    const auto j = i + static_cast<std::size_t>(stream.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  auto coefficient = [&stream] {
    const double mag = 0.5 + 1.5 * stream.next_uniform();
    return (stream.next_u64() >> 63) ? -mag : mag;
  };
  auto position = [&perm](std::size_t i) { return perm.size() ? perm[i] : i; };
  std::vector<ColumnMix> mixes(count);
  for (std::size_t m = 0; m < count; ++m) {
    mixes[m].j = position(pool[2 * m]);
    mixes[m].k = position(pool[2 * m + 1]);
    mixes[m].a = coefficient();
    mixes[m].b = coefficient();
  }
  return mixes;
}

SecretBasisSpec derive_basis_spec(const BlpKey& key, BasisLayout layout) {
  validate(key);
  SecretBasisSpec spec;
  spec.layout = layout;
  spec.n = key.M;
  spec.alpha = key.alpha;
  spec.beta = key.beta;
  const std::size_t dim = spec.dim();
  if (key.scramble) {
    RandStream s(key.seed, "perm");
    spec.perm = random_permutation(s, dim);
  }
  if (key.dmax > 1) {
    RandStream s(key.seed, "scale");
    if (layout == BasisLayout::vector1d) {
      spec.scale = random_integer_scaling(s, dim, key.dmax);
    } else {
      // One factor per coefficient column, shared by its n entries.
      const ScalingDiag per_column = random_integer_scaling(s, key.M, key.dmax);
      std::vector<double> d(dim);
      for (std::size_t p = 0; p < dim; ++p) d[p] = per_column[p / key.M];
      spec.scale = ScalingDiag(std::move(d));
    }
  }
  spec.region = layout == BasisLayout::vector1d ? significant_region_1d(key.M, key.mix_region)
                                                : significant_region_2d(key.M, key.mix_region);
  if (key.mix_count > 0) {
    RandStream s(key.seed, "mix");
    spec.mixes = sample_mixes(s, spec.region, key.mix_count, spec.perm);
  }
  return spec;
}

// ---------------------------------------------------------------------------

namespace {

DenseMatrix derive_sensing(const BlpKey& key) {
  RandStream s(key.seed, "A");
  return gaussian_matrix(s, key.K(), key.M);
}

}  // namespace

VectorCipher::VectorCipher(const BlpKey& key)
    : key_(key),
      spec_(derive_basis_spec(key, BasisLayout::vector1d)),
      basis_(build_secret_basis(spec_)),
      sensing_(derive_sensing(key)) {}

Vector VectorCipher::encode(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != key_.M) throw ShapeError("blp_encode: x length must equal M");
  return sensing_.matrix() * basis_.analyze(x);
}

TwoStepResult VectorCipher::decode(const Vector& y, const SolverConfig& config) const {
  if (static_cast<std::size_t>(y.size()) != key_.K()) throw ShapeError("blp_decode: y length must equal K");
  return two_step_decode(sensing_, basis_, y, config);
}

DenseMatrix VectorCipher::equivalent_matrix() const { return sensing_.matrix() * basis_.analysis_matrix(); }

Vector blp_encode(const BlpKey& key, const Vector& x) { return VectorCipher(key).encode(x); }

TwoStepResult blp_decode(const BlpKey& key, const Vector& y, const SolverConfig& config) {
  return VectorCipher(key).decode(y, config);
}

// ---------------------------------------------------------------------------

MeasurementSet MeasurementSet::from_matrix(const DenseMatrix& Y) {
  MeasurementSet set;
  set.K = static_cast<std::uint32_t>(Y.rows());
  set.blocks.resize(static_cast<std::size_t>(Y.cols()));
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    auto& b = set.blocks[static_cast<std::size_t>(j)];
    b.rows.resize(static_cast<std::size_t>(Y.rows()));
    b.values.resize(static_cast<std::size_t>(Y.rows()));
    for (Eigen::Index r = 0; r < Y.rows(); ++r) {
      b.rows[static_cast<std::size_t>(r)] = static_cast<std::uint32_t>(r);
      b.values[static_cast<std::size_t>(r)] = Y(r, j);
    }
  }
  return set;
}

DenseMatrix MeasurementSet::dense(DenseMatrix* mask) const {
  const auto cols = idx(blocks.size());
  DenseMatrix Y = DenseMatrix::Zero(K, cols);
  if (mask) *mask = DenseMatrix::Zero(K, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto& b = blocks[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < b.rows.size(); ++i) {
      Y(b.rows[i], j) = b.values[i];
      if (mask) (*mask)(b.rows[i], j) = 1.0;
    }
  }
  return Y;
}

bool MeasurementSet::complete() const { return surviving() == static_cast<std::size_t>(K) * blocks.size(); }

std::size_t MeasurementSet::surviving() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.rows.size();
  return n;
}

void write_measurements(std::ostream& out, const MeasurementSet& set) {
  out.write("BLPY", 4);
  io::put_u32(out, static_cast<std::uint32_t>(set.blocks.size()));
  io::put_u32(out, set.K);
  for (const auto& b : set.blocks) {
    if (b.rows.size() != b.values.size()) throw ShapeError("measurement block: rows/values length mismatch");
    io::put_u32(out, static_cast<std::uint32_t>(b.rows.size()));
    for (std::size_t i = 0; i < b.rows.size(); ++i) {
      io::put_u32(out, b.rows[i]);
      io::put_f64(out, b.values[i]);
    }
  }
}

MeasurementSet read_measurements(std::istream& in) {
  io::expect_magic(in, "BLPY");
  const std::uint32_t count = io::get_u32(in);
  MeasurementSet set;
  set.K = io::get_u32(in);
  if (set.K == 0) throw FormatError("BLPY: K must be positive");
  for (std::uint32_t c = 0; c < count; ++c) {
    MeasurementPacket b;
    const std::uint32_t m = io::get_u32(in);
    if (m > set.K) throw FormatError("BLPY: block holds more entries than K");
    b.rows.reserve(m);
    b.values.reserve(m);
    for (std::uint32_t i = 0; i < m; ++i) {
      const std::uint32_t r = io::get_u32(in);
      const double v = io::get_f64(in);
      if (r >= set.K) throw FormatError("BLPY: row index out of range");
      if (!b.rows.empty() && r <= b.rows.back()) throw FormatError("BLPY: row indices must ascend");
      if (!std::isfinite(v)) throw FormatError("BLPY: non-finite measurement");
      b.rows.push_back(r);
      b.values.push_back(v);
    }
    set.blocks.push_back(std::move(b));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("BLPY: trailing bytes");
  return set;
}

void save_measurements(const std::string& path, const MeasurementSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  write_measurements(out, set);
  if (!out) throw FormatError("write failed: " + path);
}

MeasurementSet load_measurements(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_measurements(in);
}

// ---------------------------------------------------------------------------

Vector scramble_measurements_encode(const DenseMatrix& phi, const Permutation& pk, const Vector& x) {
  if (x.size() != phi.cols()) throw ShapeError("class I encode: x length must equal cols(Phi)");
  if (pk.size() != static_cast<std::size_t>(phi.rows())) throw ShapeError("class I encode: P_K must be K x K");
  return pk.apply(phi * x);
}

Vector scramble_frequency_encode(const DenseMatrix& phi, const Permutation& pm, const Basis& basis,
                                 const Vector& x) {
  if (x.size() != phi.cols() || basis.dim() != static_cast<std::size_t>(phi.cols()))
    throw ShapeError("class II encode: x, basis and Phi sizes disagree");
  if (pm.size() != static_cast<std::size_t>(phi.cols())) throw ShapeError("class II encode: P_M must be M x M");
  return phi * pm.apply(basis.analyze(x));
}

DrpeMasks DrpeMasks::random(RandStream& stream, std::size_t m) {
  DrpeMasks masks;
  auto draw = [&](Eigen::MatrixXcd& out) {
    out.resize(idx(m), idx(m));
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      for (Eigen::Index r = 0; r < out.rows(); ++r)
        out(r, c) = std::polar(1.0, 2.0 * std::numbers::pi * stream.next_uniform());
  };
  draw(masks.p);
  draw(masks.q);
  return masks;
}

DrpeMasks DrpeMasks::trivial(std::size_t m) {
  return {Eigen::MatrixXcd::Ones(idx(m), idx(m)), Eigen::MatrixXcd::Ones(idx(m), idx(m))};
}

Eigen::MatrixXcd dft_matrix(std::size_t m) {
  Eigen::MatrixXcd F(idx(m), idx(m));
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t v = 0; v < m; ++v)
      F(idx(u), idx(v)) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>((u * v) % m) /
                                                static_cast<double>(m));
  return F;
}

Eigen::MatrixXcd drpe_transfer_matrix(const DrpeMasks& masks) {
  const std::size_t m = masks.m();
  if (m == 0 || m > 32) throw GuardError("drpe_transfer_matrix: m must lie in [1, 32]");
  const Eigen::MatrixXcd F = dft_matrix(m);
  Eigen::MatrixXcd Fbar(idx(m * m), idx(m * m));
  for (Eigen::Index a = 0; a < F.rows(); ++a)
    for (Eigen::Index b = 0; b < F.cols(); ++b) Fbar.block(a * F.rows(), b * F.cols(), F.rows(), F.cols()) = F(a, b) * F;
  const Eigen::Map<const Eigen::VectorXcd> pv(masks.p.data(), masks.p.size());
  const Eigen::Map<const Eigen::VectorXcd> qv(masks.q.data(), masks.q.size());
  return Fbar.adjoint() * qv.asDiagonal() * Fbar * pv.asDiagonal();
}

Eigen::MatrixXcd drpe_apply(const DrpeMasks& masks, const Eigen::MatrixXcd& Y) {
  if (Y.rows() != masks.p.rows() || Y.cols() != masks.p.cols()) throw ShapeError("drpe_apply: field size");
  const Eigen::MatrixXcd F = dft_matrix(masks.m());
  const Eigen::MatrixXcd spectrum = F * Y.cwiseProduct(masks.p) * F;
  return F.adjoint() * spectrum.cwiseProduct(masks.q) * F.adjoint();
}

ComplexVector drpe_cs_encode(const DenseMatrix& phi, const DrpeMasks& masks, const Vector& x) {
  const std::size_t m = masks.m();
  if (static_cast<std::size_t>(phi.rows()) != m * m) throw ShapeError("drpe_cs_encode: rows(Phi) must be m^2");
  if (x.size() != phi.cols()) throw ShapeError("drpe_cs_encode: x length must equal cols(Phi)");
  const Vector y = phi * x;
  const Eigen::MatrixXcd Y = Eigen::Map<const DenseMatrix>(y.data(), idx(m), idx(m)).cast<std::complex<double>>();
  const Eigen::MatrixXcd C = drpe_apply(masks, Y);
  return Eigen::Map<const ComplexVector>(C.data(), C.size());
}

Vector interleave(const ComplexVector& v) {
  Vector out(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[2 * i] = v[i].real();
    out[2 * i + 1] = v[i].imag();
  }
  return out;
}

ComplexVector deinterleave(const Vector& v) {
  if (v.size() % 2 != 0) throw ShapeError("deinterleave: odd length");
  ComplexVector out(v.size() / 2);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = {v[2 * i], v[2 * i + 1]};
  return out;
}

}  // namespace blpcs
