#include "blpcs/experiments.hpp"

#include "blpcs/attacks.hpp"
#include "blpcs/errors.hpp"
#include "blpcs/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <ostream>

namespace blpcs {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// k distinct positions in [0, n), in draw order.
std::vector<std::size_t> random_support(RandStream& s, std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + static_cast<std::size_t>(s.next_below(n - i))]);
  pool.resize(k);
  return pool;
}

Vector gaussian_sparse(RandStream& s, std::size_t n, std::size_t k) {
  Vector v = Vector::Zero(idx(n));
  for (std::size_t i : random_support(s, n, k)) v[idx(i)] = s.next_gaussian();
  return v;
}

}  // namespace

SolverConfig attack_solver() {
  SolverConfig c;
  c.method = SolverMethod::ista;
  c.max_iters = 2000;
  c.accelerated = true;
  c.debias = true;
  return c;
}

// ---------------------------------------------------------------------------

std::vector<Fig1Row> run_fig1(const Fig1Config& cfg) {
  if (cfg.K > cfg.M || cfg.k > cfg.M || cfg.dmax < 1) throw ShapeError("fig1: inconsistent sizes");
  std::vector<Fig1Row> rows(cfg.seeds);
  parallel_for(cfg.seeds, [&](std::size_t t) {
    const KeySeed seed{cfg.seed_base + t};
    RandStream sd(seed, "scale"), sa(seed, "A"), sx(seed, "x");
    const ScalingDiag d = random_integer_scaling(sd, cfg.M, cfg.dmax);
    const DenseMatrix phi = antipodal_scaled_matrix(sa, cfg.K, cfg.M, d);
    Vector x = Vector::Zero(idx(cfg.M));
    for (std::size_t i : random_support(sx, cfg.M, cfg.k)) x[idx(i)] = 1.0;
    const Vector y = phi * x;

    const Eigen::Map<const Vector> dv(d.values().data(), idx(cfg.M));
    const DenseMatrix A = phi * dv.cwiseInverse().asDiagonal();
    SolverConfig omp;
    omp.method = SolverMethod::omp;
    const RecoveryReport two = omp_recover(A, y, cfg.K, omp);
    const RecoveryReport direct = ista_bpdn(phi, y, attack_solver());

    EnsembleSpec spec{EnsembleKind::antipodal_scaled, cfg.K, cfg.M, d};
    Fig1Row& r = rows[t];
    r.seed = seed.value;
    r.two_step_error = relative_error(two.estimate.cwiseQuotient(dv), x);
    r.direct_error = relative_error(direct.estimate, x);
    r.mu = coherence_parameter(spec);
    r.theta = covariance_condition(spec);
    r.ripless_bound = ripless_sample_bound(r.mu, r.theta, static_cast<double>(cfg.k), static_cast<double>(cfg.M), 1.0);
  });
  return rows;
}

void write_fig1_csv(std::ostream& out, const std::vector<Fig1Row>& rows) {
  out << "seed,two_step_rel_error,direct_rel_error,mu,theta,ripless_bound\n";
  for (const auto& r : rows)
    out << r.seed << ',' << fmt("%.6e", r.two_step_error) << ',' << fmt("%.6e", r.direct_error) << ','
        << fmt("%.6g", r.mu) << ',' << fmt("%.6g", r.theta) << ',' << fmt("%.6g", r.ripless_bound) << '\n';
}

// ---------------------------------------------------------------------------

DenseMatrix center_crop(const DenseMatrix& image, std::size_t side) {
  if (side > static_cast<std::size_t>(std::min(image.rows(), image.cols())))
    throw ShapeError("center_crop: side exceeds image");
  const Eigen::Index r0 = (image.rows() - idx(side)) / 2, c0 = (image.cols() - idx(side)) / 2;
  return image.block(r0, c0, idx(side), idx(side));
}

std::vector<StermRow> run_sterm(const DenseMatrix& X, const StermConfig& cfg) {
  if (X.rows() != X.cols() || X.rows() % 2 != 0) throw ShapeError("sterm: image must be square with even side");
  const auto n = static_cast<std::size_t>(X.rows());
  const DenseMatrix C = dct_matrix(n / 2);
  DenseMatrix Rd = DenseMatrix::Zero(idx(n), idx(n));
  Rd.topLeftCorner(idx(n / 2), idx(n / 2)) = C;
  Rd.bottomRightCorner(idx(n / 2), idx(n / 2)) = C;
  const DenseMatrix Sd = rpfrct2d_forward(X, Rd, Rd);

  auto approx_psnr = [&](const DenseMatrix& S, const DenseMatrix& R1, const DenseMatrix& R2, std::size_t s) {
    const Vector kept = best_s_term(Eigen::Map<const Vector>(S.data(), S.size()), s);
    const DenseMatrix Sk = Eigen::Map<const DenseMatrix>(kept.data(), S.rows(), S.cols());
    return psnr(X, rpfrct2d_inverse(Sk, R1, R2));
  };

  std::vector<StermRow> rows;
  for (double a : cfg.alphas) {
    const DenseMatrix Ra = rpfrct_matrix(n, a);
    for (double b : cfg.betas) {
      const DenseMatrix Rb = rpfrct_matrix(n, b);
      const DenseMatrix S = rpfrct2d_forward(X, Ra, Rb);
      for (double f : cfg.keep_fractions) {
        StermRow r;
        r.alpha = a;
        r.beta = b;
        r.s = static_cast<std::size_t>(std::lround(f * static_cast<double>(n * n)));
        r.psnr_rpfrct = approx_psnr(S, Ra, Rb, r.s);
        r.psnr_dct2 = approx_psnr(Sd, Rd, Rd, r.s);
        r.ratio = r.psnr_rpfrct / r.psnr_dct2;
        rows.push_back(r);
      }
    }
  }
  return rows;
}

void write_sterm_csv(std::ostream& out, const std::vector<StermRow>& rows) {
  out << "alpha,beta,s,psnr_rpfrct_db,psnr_dct2_db,ratio\n";
  for (const auto& r : rows)
    out << fmt("%.4g", r.alpha) << ',' << fmt("%.4g", r.beta) << ',' << r.s << ',' << fmt("%.4f", r.psnr_rpfrct) << ','
        << fmt("%.4f", r.psnr_dct2) << ',' << fmt("%.8f", r.ratio) << '\n';
}

// ---------------------------------------------------------------------------

std::string model_name(ImageModel m) { return m == ImageModel::blp ? "blp-cs" : "bcs-in"; }

std::string channel_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::ideal: return "ideal";
    case ChannelKind::awgn: return "awgn";
    case ChannelKind::packet_loss: return "packet_loss";
  }
  return "?";
}

std::vector<ImageCell> table1_cells(const std::vector<double>& srs) {
  std::vector<ImageCell> cells;
  for (double sr : srs) {
    cells.push_back({sr, ImageModel::blp, {}});
    cells.push_back({sr, ImageModel::bcs_in, {}});
  }
  return cells;
}

std::vector<ImageCell> table2_cells(const std::vector<double>& srs, const std::vector<double>& plrs, double noise_var) {
  std::vector<ImageCell> cells;
  for (double sr : srs) {
    cells.push_back({sr, ImageModel::blp, {}});
    cells.push_back({sr, ImageModel::blp, {ChannelKind::awgn, noise_var, 0.0}});
    for (double p : plrs) cells.push_back({sr, ImageModel::blp, {ChannelKind::packet_loss, noise_var, p}});
  }
  return cells;
}

std::vector<ImageRow> run_image_cells(const GrayImage& image, const std::vector<ImageCell>& cells,
                                      const ImageExperimentConfig& cfg) {
  if (cfg.trials == 0) throw ShapeError("image experiment: trials must be positive");
  for (const auto& c : cells) validate(c.channel);
  const std::size_t n = image.n();
  std::vector<std::vector<double>> errors(cells.size());
  std::vector<double> seconds(cells.size(), 0.0);

  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = cfg.seed_base + t;
    std::map<std::pair<double, ImageModel>, std::pair<std::shared_ptr<ImageCipher>, MeasurementSet>> encoded;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const ImageCell& cell = cells[c];
      auto key_id = std::make_pair(cell.sr, cell.model);
      auto it = encoded.find(key_id);
      if (it == encoded.end()) {
        BlpKey key = keygen(seed, n, cell.sr, cfg.alpha, cfg.beta, cfg.dmax, cfg.mix_count);
        if (cell.model == ImageModel::bcs_in) key = without_permutation(key);
        auto cipher = std::make_shared<ImageCipher>(key);
        MeasurementSet packets = cipher->encode(image);
        it = encoded.emplace(key_id, std::make_pair(cipher, std::move(packets))).first;
      }
      const auto& [cipher, packets] = it->second;
      const MeasurementSet received = apply_channel(packets, cell.channel, KeySeed{seed});
      const auto t0 = std::chrono::steady_clock::now();
      const GrayImage out = cipher->decode(received, cfg.decode);
      seconds[c] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      errors[c].push_back((out.pixels - image.pixels).squaredNorm());
    }
  }

  std::vector<ImageRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ImageRow r;
    r.image = cfg.image_name;
    r.sr = cells[c].sr;
    r.model = cells[c].model;
    r.channel = cells[c].channel;
    r.apsnr_db = apsnr(errors[c], n * n);
    r.seconds = cfg.record_time ? seconds[c] / static_cast<double>(cfg.trials) : 0.0;
    rows.push_back(r);
  }
  return rows;
}

void write_image_csv(std::ostream& out, const std::vector<ImageRow>& rows) {
  out << "image,sr,model,channel,plr,apsnr_db,seconds\n";
  for (const auto& r : rows)
    out << r.image << ',' << fmt("%.4g", r.sr) << ',' << model_name(r.model) << ',' << channel_name(r.channel.kind)
        << ',' << fmt("%.4g", r.channel.kind == ChannelKind::packet_loss ? r.channel.plr : 0.0) << ','
        << format_db(r.apsnr_db) << ',' << fmt("%.3f", r.seconds) << '\n';
}

// ---------------------------------------------------------------------------

namespace {

AttackRow cpa_row(const std::string& target, std::uint64_t seed, const EncryptionOracle& oracle, const Vector& x,
                  const Basis& public_basis, std::size_t K, std::size_t k) {
  RandStream verify(KeySeed{seed}, "verify/" + target);
  const AttackReport rep = cpa_recover_matrix(oracle, verify);
  const TwoStepResult dec = cpa_break_and_decode(rep.recovered_matrix, oracle.encode(x), public_basis, attack_solver());
  AttackRow row;
  row.target = target;
  row.seed = seed;
  row.M = oracle.input_length;
  row.K = K;
  row.k = k;
  row.queries = rep.queries_used;
  row.rel_error = relative_error(dec.x, x);
  row.break_success = row.rel_error < kBreakThreshold;
  return row;
}

}  // namespace

std::vector<AttackRow> run_attacks(const AttackExperimentConfig& cfg) {
  const std::size_t per_seed = cfg.include_informed ? 6 : 5;
  std::vector<AttackRow> rows(cfg.seeds * per_seed);
  const Basis dct = dct_basis(cfg.M);
  const Basis dct_small = dct_basis(cfg.drpe_M);
  parallel_for(cfg.seeds, [&](std::size_t t) {
    const std::uint64_t seed = cfg.seed_base + t;
    const KeySeed ks{seed};
    AttackRow* out = &rows[t * per_seed];

    RandStream sphi(ks, "phi"), sperm(ks, "baseline_perm"), sx(ks, "plaintext");
    const DenseMatrix phi = gaussian_matrix(sphi, cfg.K, cfg.M);
    const Permutation pk = random_permutation(sperm, cfg.K);
    const Permutation pm = random_permutation(sperm, cfg.M);
    const Vector s = gaussian_sparse(sx, cfg.M, cfg.k);
    const Vector x = dct.synthesize(s);

    const EncryptionOracle class1{[&](const Vector& v) { return scramble_measurements_encode(phi, pk, v); }, cfg.M};
    out[0] = cpa_row("class1", seed, class1, x, dct, cfg.K, cfg.k);
    const EncryptionOracle class2{[&](const Vector& v) { return scramble_frequency_encode(phi, pm, dct, v); }, cfg.M};
    out[1] = cpa_row("class2", seed, class2, x, dct, cfg.K, cfg.k);

    RandStream sdp(ks, "drpe_phi"), sdm(ks, "drpe_masks");
    const DenseMatrix phi_d = gaussian_matrix(sdp, cfg.drpe_m * cfg.drpe_m, cfg.drpe_M);
    const DrpeMasks masks = DrpeMasks::random(sdm, cfg.drpe_m);
    const Vector xd = dct_small.synthesize(gaussian_sparse(sx, cfg.drpe_M, cfg.drpe_k));
    const EncryptionOracle drpe{[&](const Vector& v) { return interleave(drpe_cs_encode(phi_d, masks, v)); },
                                cfg.drpe_M};
    out[2] = cpa_row("drpe", seed, drpe, xd, dct_small, cfg.drpe_m * cfg.drpe_m, cfg.drpe_k);

    const double sr = static_cast<double>(cfg.K) / static_cast<double>(cfg.M);
    const BlpKey key = keygen(seed, cfg.M, sr, 0.99, 0.99, cfg.dmax, cfg.M / 32);
    const VectorCipher blp(key);
    const Vector xb = blp.basis().synthesize(gaussian_sparse(sx, cfg.M, cfg.k));
    const EncryptionOracle blp_oracle{[&](const Vector& v) { return blp.encode(v); }, cfg.M};
    out[3] = cpa_row("blp", seed, blp_oracle, xb, dct, key.K(), cfg.k);
    std::size_t next = 4;
    if (cfg.include_informed)
      out[next++] = cpa_row("blp_known_rpfrct", seed, blp_oracle, xb, rpfrct_basis(cfg.M, key.alpha), key.K(), cfg.k);

    RandStream swa(ks, "wk_A"), sww(ks, "wk_A_wrong");
    const DenseMatrix A = gaussian_matrix(swa, cfg.wk_K, cfg.wk_M);
    const DenseMatrix Aw = gaussian_matrix(sww, cfg.wk_K, cfg.wk_M);
    const Vector xw = gaussian_sparse(sx, cfg.wk_M, cfg.wk_k);
    const AttackReport wk = wrong_key_recovery_demo(A, Aw, A * xw, xw);
    AttackRow& w = out[next];
    w.target = "wrong_key";
    w.seed = seed;
    w.M = cfg.wk_M;
    w.K = cfg.wk_K;
    w.k = cfg.wk_k;
    w.queries = 0;
    w.rel_error = wk.reconstruction_error;
    w.break_success = wk.break_success;
    w.residual = wk.verification_error;
  });
  return rows;
}

void write_attack_csv(std::ostream& out, const std::vector<AttackRow>& rows) {
  out << "target,seed,M,K,k,queries,break_success,rel_error\n";
  for (const auto& r : rows)
    out << r.target << ',' << r.seed << ',' << r.M << ',' << r.K << ',' << r.k << ',' << r.queries << ','
        << (r.break_success ? 1 : 0) << ',' << fmt("%.6e", r.rel_error) << '\n';
}

}  // namespace blpcs
