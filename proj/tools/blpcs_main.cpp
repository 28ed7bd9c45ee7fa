#include "blpcs/attacks.hpp"
#include "blpcs/cipher.hpp"
#include "blpcs/errors.hpp"
#include "blpcs/experiments.hpp"
#include "blpcs/imaging.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

using namespace blpcs;

namespace {

enum ExitCode { kOk = 0, kArgument = 2, kFormat = 3, kGuard = 4 };

// Writes to the named file, or stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw FormatError("cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw FormatError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct KeygenArgs {
  std::uint64_t seed = 1;
  std::size_t n = 512;
  double sr = 0.3;
  double alpha = 0.99;
  double beta = 0.95;
  int dmax = 60;
  std::size_t mix_count = 16;
  std::size_t mix_region = 0;
  bool no_scramble = false;
  std::string out;
};

struct CodecArgs {
  std::string key, in, out, reference;
  std::string channel = "ideal";
  double noise_var = 1.0;
  double plr = 0.0;
  std::uint64_t channel_seed = 1;
};

struct AttackArgs {
  std::string target = "all";
  std::uint64_t seed = 1;
  std::size_t seeds = 20;
  std::size_t pairs = 200;
  std::string out;
};

struct ExpArgs {
  std::string name;
  std::uint64_t seed = 1;
  std::size_t seeds = 100;
  bool seeds_given = false;
  std::size_t trials = 10;
  std::string image = "data/coffee.pgm";
  std::vector<double> srs{0.1, 0.3, 0.5, 0.7};
  std::vector<double> plrs{0.1, 0.2, 0.3};
  std::vector<double> alphas{0.92, 0.95, 0.99, 1.0};
  std::vector<double> betas{0.92, 0.95, 0.99, 1.0};
  std::vector<double> keep{0.05, 0.1, 0.2};
  double noise_var = 1.0;
  double alpha = 0.99;
  double beta = 0.95;
  int dmax = 60;
  std::size_t mix_count = 16;
  std::size_t crop = 128;
  bool timing = false;
  std::string out;
};

ChannelModel parse_channel(const CodecArgs& a) {
  ChannelModel m;
  if (a.channel == "ideal") m.kind = ChannelKind::ideal;
  else if (a.channel == "awgn") m.kind = ChannelKind::awgn;
  else if (a.channel == "packet_loss") m.kind = ChannelKind::packet_loss;
  else throw ShapeError("unknown channel '" + a.channel + "'");
  m.noise_var = a.noise_var;
  m.plr = a.plr;
  validate(m);
  return m;
}

std::string image_label(const std::string& path) {
  std::string base = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
  return base.substr(0, base.rfind('.'));
}

int cmd_keygen(const KeygenArgs& a) {
  const BlpKey key = keygen(a.seed, a.n, a.sr, a.alpha, a.beta, a.dmax, a.mix_count, a.mix_region, !a.no_scramble);
  Output out(a.out);
  out.stream() << serialize_key(key);
  out.finish();
  return kOk;
}

int cmd_encode(const CodecArgs& a) {
  const ImageCipher cipher(load_key(a.key));
  const GrayImage image = load_pgm(a.in);
  if (image.n() != cipher.key().M) throw ShapeError("image side does not match the key size");
  const MeasurementSet y = apply_channel(cipher.encode(image), parse_channel(a), KeySeed{a.channel_seed});
  save_measurements(a.out, y);
  return kOk;
}

int cmd_decode(const CodecArgs& a) {
  const ImageCipher cipher(load_key(a.key));
  const MeasurementSet y = load_measurements(a.in);
  if (y.blocks.size() != cipher.key().M || y.K != cipher.key().K())
    throw FormatError("measurement file does not match the key");
  const GrayImage out = cipher.decode(y).quantized();
  if (!a.out.empty()) save_pgm(a.out, out);
  if (!a.reference.empty()) {
    const GrayImage ref = load_pgm(a.reference);
    if (ref.n() != out.n()) throw ShapeError("reference side does not match");
    std::cout << "APSNR " << format_db(psnr(ref.pixels, out.pixels)) << " dB\n";
  }
  return kOk;
}

int cmd_attack(const AttackArgs& a) {
  Output out(a.out);
  if (a.target == "distance") {
    const BlpKey key = keygen(a.seed, 256, 0.25, 0.99, 0.99, 60, 8);
    const VectorCipher cipher(key);
    const EncryptionOracle oracle{[&](const Vector& v) { return cipher.encode(v); }, key.M};
    RandStream stream(KeySeed{a.seed}, "distance");
    out.stream() << "plain_distance,cipher_distance\n";
    char buf[64];
    for (const auto& [dx, dy] : distance_pairs(oracle, a.pairs, stream)) {
      std::snprintf(buf, sizeof buf, "%.6e,%.6e\n", dx, dy);
      out.stream() << buf;
    }
    out.finish();
    return kOk;
  }
  const std::vector<std::string> known{"all", "class1", "class2", "drpe", "blp", "blp_known_rpfrct", "wrong_key"};
  if (std::find(known.begin(), known.end(), a.target) == known.end())
    throw ShapeError("unknown attack target '" + a.target + "'");
  AttackExperimentConfig cfg;
  cfg.seed_base = a.seed;
  cfg.seeds = a.seeds;
  std::vector<AttackRow> rows = run_attacks(cfg);
  if (a.target != "all")
    rows.erase(std::remove_if(rows.begin(), rows.end(), [&](const AttackRow& r) { return r.target != a.target; }),
               rows.end());
  write_attack_csv(out.stream(), rows);
  out.finish();
  return kOk;
}

int cmd_exp(const ExpArgs& a) {
  Output out(a.out);
  if (a.name == "fig1") {
    Fig1Config cfg;
    cfg.seeds = a.seeds;
    cfg.seed_base = a.seed;
    write_fig1_csv(out.stream(), run_fig1(cfg));
  } else if (a.name == "sterm") {
    StermConfig cfg;
    cfg.alphas = a.alphas;
    cfg.betas = a.betas;
    cfg.keep_fractions = a.keep;
    const GrayImage image = load_pgm(a.image);
    write_sterm_csv(out.stream(), run_sterm(center_crop(image.pixels, a.crop), cfg));
  } else if (a.name == "table1" || a.name == "table2") {
    ImageExperimentConfig cfg;
    cfg.image_name = image_label(a.image);
    cfg.alpha = a.alpha;
    cfg.beta = a.beta;
    cfg.dmax = a.dmax;
    cfg.mix_count = a.mix_count;
    cfg.trials = a.trials;
    cfg.seed_base = a.seed;
    cfg.record_time = a.timing;
    const auto cells = a.name == "table1" ? table1_cells(a.srs) : table2_cells(a.srs, a.plrs, a.noise_var);
    write_image_csv(out.stream(), run_image_cells(load_pgm(a.image), cells, cfg));
  } else if (a.name == "attack") {
    AttackExperimentConfig cfg;
    cfg.seed_base = a.seed;
    if (a.seeds_given) cfg.seeds = a.seeds;
    write_attack_csv(out.stream(), run_attacks(cfg));
  } else {
    throw ShapeError("unknown experiment '" + a.name + "'");
  }
  out.finish();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive-sensing encryption with secret scrambled bases"};
  app.require_subcommand(1);

  KeygenArgs kg;
  auto* keygen_cmd = app.add_subcommand("keygen", "Write a text key file");
  keygen_cmd->add_option("--seed", kg.seed, "Key seed")->required();
  keygen_cmd->add_option("--n,--M", kg.n, "Image side or signal length")->required();
  keygen_cmd->add_option("--sr", kg.sr, "Sampling rate K/n in (0, 1]")->required();
  keygen_cmd->add_option("--alpha", kg.alpha, "RPFrCT order along columns");
  keygen_cmd->add_option("--beta", kg.beta, "RPFrCT order along rows");
  keygen_cmd->add_option("--dmax", kg.dmax, "Scaling entries drawn from [1, dmax]; 1 disables scaling");
  keygen_cmd->add_option("--mix-count", kg.mix_count, "Number of column mixes in the significant region");
  keygen_cmd->add_option("--mix-region", kg.mix_region, "Significant region side (0 = n/8)");
  keygen_cmd->add_flag("--no-scramble", kg.no_scramble, "Drop the permutation (BCS-In key)");
  keygen_cmd->add_option("--out", kg.out, "Output path (default stdout)");

  CodecArgs enc;
  auto* encode_cmd = app.add_subcommand("encode", "Encode a PGM image into a BLPY measurement file");
  encode_cmd->add_option("--key", enc.key, "Key file")->required();
  encode_cmd->add_option("--in", enc.in, "Input PGM")->required();
  encode_cmd->add_option("--out", enc.out, "Output BLPY file")->required();
  encode_cmd->add_option("--channel", enc.channel, "ideal | awgn | packet_loss");
  encode_cmd->add_option("--noise-var", enc.noise_var, "AWGN variance");
  encode_cmd->add_option("--plr", enc.plr, "Packet loss rate in [0, 1)");
  encode_cmd->add_option("--channel-seed", enc.channel_seed, "Seed for channel randomness");

  CodecArgs dec;
  auto* decode_cmd = app.add_subcommand("decode", "Decode a BLPY measurement file into a PGM image");
  decode_cmd->add_option("--key", dec.key, "Key file")->required();
  decode_cmd->add_option("--in", dec.in, "Input BLPY file")->required();
  decode_cmd->add_option("--out", dec.out, "Output PGM");
  decode_cmd->add_option("--reference", dec.reference, "Original PGM; prints the APSNR");

  AttackArgs at;
  auto* attack_cmd = app.add_subcommand("attack", "Chosen-plaintext attack demos as CSV");
  attack_cmd->add_option("--target", at.target,
                         "all | class1 | class2 | drpe | blp | blp_known_rpfrct | wrong_key | distance");
  attack_cmd->add_option("--seed", at.seed, "First seed");
  attack_cmd->add_option("--seeds", at.seeds, "Number of seeds");
  attack_cmd->add_option("--pairs", at.pairs, "Plaintext pairs for the distance demo");
  attack_cmd->add_option("--out", at.out, "Output CSV (default stdout)");

  ExpArgs ex;
  auto* exp_cmd = app.add_subcommand("exp", "Regenerate an experiment as CSV");
  exp_cmd->add_option("name", ex.name, "fig1 | sterm | table1 | table2 | attack")->required();
  exp_cmd->add_option("--seed", ex.seed, "First seed");
  exp_cmd->add_option("--seeds", ex.seeds, "Seeds for fig1 and attack");
  exp_cmd->add_option("--trials", ex.trials, "Trials per image cell");
  exp_cmd->add_option("--image", ex.image, "PGM image for sterm and tables");
  exp_cmd->add_option("--sr", ex.srs, "Sampling rates")->delimiter(',');
  exp_cmd->add_option("--plr", ex.plrs, "Packet loss rates for table2")->delimiter(',');
  exp_cmd->add_option("--noise-var", ex.noise_var, "AWGN variance for table2");
  exp_cmd->add_option("--alpha", ex.alpha, "Column order for tables");
  exp_cmd->add_option("--beta", ex.beta, "Row order for tables");
  exp_cmd->add_option("--alphas", ex.alphas, "Column orders for sterm")->delimiter(',');
  exp_cmd->add_option("--betas", ex.betas, "Row orders for sterm")->delimiter(',');
  exp_cmd->add_option("--keep", ex.keep, "Kept coefficient fractions for sterm")->delimiter(',');
  exp_cmd->add_option("--dmax", ex.dmax, "Scaling range for tables");
  exp_cmd->add_option("--mix-count", ex.mix_count, "Column mixes for tables");
  exp_cmd->add_option("--crop", ex.crop, "Center crop side for sterm");
  exp_cmd->add_flag("--timing", ex.timing, "Fill the seconds column with wall-clock decode time");
  exp_cmd->add_option("--out", ex.out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kArgument;
  }

  ex.seeds_given = exp_cmd->count("--seeds") > 0;
  try {
    if (keygen_cmd->parsed()) return cmd_keygen(kg);
    if (encode_cmd->parsed()) return cmd_encode(enc);
    if (decode_cmd->parsed()) return cmd_decode(dec);
    if (attack_cmd->parsed()) return cmd_attack(at);
    if (exp_cmd->parsed()) return cmd_exp(ex);
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kArgument;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFormat;
  } catch (const GuardError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGuard;
  }
  return kArgument;
}
