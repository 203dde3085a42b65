#include "sgcl/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sgcl/rng.hpp"

namespace sgcl {

void EncoderConfig::validate() const {
  if (d < 2) throw std::invalid_argument("EncoderConfig: d must be >= 2");
  if (layers < 1) throw std::invalid_argument("EncoderConfig: layers must be >= 1");
  if (max_len < 1) throw std::invalid_argument("EncoderConfig: max_len must be >= 1");
}

namespace {

template <typename Self, typename MatrixPtr>
std::vector<std::pair<std::string, MatrixPtr>> entries_impl(Self& p) {
  std::vector<std::pair<std::string, MatrixPtr>> out = {
      {"item_embeddings", &p.item_embeddings},
      {"position_embeddings", &p.position_embeddings},
      {"w_in", &p.w_in},
      {"w_out", &p.w_out},
      {"b_in", &p.b_in},
      {"b_out", &p.b_out},
      {"w_z", &p.w_z},
      {"w_r", &p.w_r},
      {"w_h", &p.w_h},
      {"u_z", &p.u_z},
      {"u_r", &p.u_r},
      {"u_h", &p.u_h},
      {"w_q1", &p.w_q1},
      {"w_k1", &p.w_k1},
      {"w_q2", &p.w_q2},
      {"w_k2", &p.w_k2},
      {"w_hw", &p.w_hw},
      {"w_0", &p.w_0},
      {"w_1", &p.w_1},
      {"w_2", &p.w_2},
      {"w_3", &p.w_3},
      {"b_0", &p.b_0},
      {"w_pred", &p.w_pred},
      {"b_pred", &p.b_pred},
      {"w_h1", &p.w_h1},
      {"b_h1", &p.b_h1},
      {"w_h2", &p.w_h2},
      {"b_h2", &p.b_h2},
  };
  if (p.has_ln_affine()) {
    out.emplace_back("ln_gain", &p.ln_gain);
    out.emplace_back("ln_bias", &p.ln_bias);
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Matrix*>> ModelParams::entries() {
  return entries_impl<ModelParams, Matrix*>(*this);
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::entries() const {
  return entries_impl<const ModelParams, const Matrix*>(*this);
}

ModelParams ModelParams::init(const EncoderConfig& cfg, int vocab_size, std::uint64_t seed,
                              bool ln_affine) {
  cfg.validate();
  if (vocab_size < 2) throw std::invalid_argument("ModelParams::init: vocab too small");
  const int d = cfg.d;
  ModelParams p;
  p.item_embeddings.resize(vocab_size, d);
  p.position_embeddings.resize(cfg.max_len, d);
  p.w_in.resize(d, d);
  p.w_out.resize(d, d);
  p.b_in.resize(1, d);
  p.b_out.resize(1, d);
  p.w_z.resize(d, 2 * d);
  p.w_r.resize(d, 2 * d);
  p.w_h.resize(d, 2 * d);
  p.u_z.resize(d, d);
  p.u_r.resize(d, d);
  p.u_h.resize(d, d);
  p.w_q1.resize(d, d);
  p.w_k1.resize(d, d);
  p.w_q2.resize(d, d);
  p.w_k2.resize(d, d);
  p.w_hw.resize(d, 2 * d);
  p.w_0.resize(1, d);
  p.w_1.resize(d, d);
  p.w_2.resize(d, d);
  p.w_3.resize(d, d);
  p.b_0.resize(1, d);
  p.w_pred.resize(d, 2 * d);
  p.b_pred.resize(1, d);
  p.w_h1.resize(d, 2 * d);
  p.b_h1.resize(1, d);
  p.w_h2.resize(d, d);
  p.b_h2.resize(1, d);
  if (ln_affine) {
    p.ln_gain = Matrix::Ones(1, d);
    p.ln_bias = Matrix::Zero(1, d);
  }

  const Real bound = 1.0 / std::sqrt(static_cast<Real>(d));
  Rng rng = Rng::from_key({seed, 0x494E4954ULL});
  for (auto& [name, mat] : p.entries()) {
    if (name == "ln_gain" || name == "ln_bias") continue;  // identity start
    for (Eigen::Index i = 0; i < mat->size(); ++i) (*mat)(i) = rng.next_range(-bound, bound);
  }
  return p;
}

ParamVars watch_params(Tape& tape, const ModelParams& params) {
  ParamVars v;
  auto entries = params.entries();
  v.ordered.reserve(entries.size());
  for (auto& [name, mat] : entries) v.ordered.push_back(tape.leaf(*mat));
  std::size_t i = 0;
  v.item_embeddings = v.ordered[i++];
  v.position_embeddings = v.ordered[i++];
  v.w_in = v.ordered[i++];
  v.w_out = v.ordered[i++];
  v.b_in = v.ordered[i++];
  v.b_out = v.ordered[i++];
  v.w_z = v.ordered[i++];
  v.w_r = v.ordered[i++];
  v.w_h = v.ordered[i++];
  v.u_z = v.ordered[i++];
  v.u_r = v.ordered[i++];
  v.u_h = v.ordered[i++];
  v.w_q1 = v.ordered[i++];
  v.w_k1 = v.ordered[i++];
  v.w_q2 = v.ordered[i++];
  v.w_k2 = v.ordered[i++];
  v.w_hw = v.ordered[i++];
  v.w_0 = v.ordered[i++];
  v.w_1 = v.ordered[i++];
  v.w_2 = v.ordered[i++];
  v.w_3 = v.ordered[i++];
  v.b_0 = v.ordered[i++];
  v.w_pred = v.ordered[i++];
  v.b_pred = v.ordered[i++];
  v.w_h1 = v.ordered[i++];
  v.b_h1 = v.ordered[i++];
  v.w_h2 = v.ordered[i++];
  v.b_h2 = v.ordered[i++];
  if (params.has_ln_affine()) {
    v.ln_gain = v.ordered[i++];
    v.ln_bias = v.ordered[i++];
    v.has_ln_affine = true;
  }
  return v;
}

namespace {
constexpr char kCkptMagic[8] = {'S', 'G', 'C', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint16_t kCkptVersion = 1;
}  // namespace

void save_checkpoint(const ModelParams& params, const EncoderConfig& cfg,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write(kCkptMagic, sizeof kCkptMagic);
  os.write(reinterpret_cast<const char*>(&kCkptVersion), sizeof kCkptVersion);
  std::int32_t meta[5] = {cfg.d, cfg.layers, cfg.max_len, params.vocab_size(),
                          params.has_ln_affine() ? 1 : 0};
  os.write(reinterpret_cast<const char*>(meta), sizeof meta);
  auto entries = params.entries();
  auto count = static_cast<std::uint32_t>(entries.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (auto& [name, mat] : entries) {
    auto len = static_cast<std::uint16_t>(name.size());
    os.write(reinterpret_cast<const char*>(&len), sizeof len);
    os.write(name.data(), len);
    std::uint32_t shape[2] = {static_cast<std::uint32_t>(mat->rows()),
                              static_cast<std::uint32_t>(mat->cols())};
    os.write(reinterpret_cast<const char*>(shape), sizeof shape);
    os.write(reinterpret_cast<const char*>(mat->data()),
             static_cast<std::streamsize>(sizeof(Real) * static_cast<std::size_t>(mat->size())));
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCkptMagic, sizeof kCkptMagic) != 0)
    throw std::runtime_error(path + " is not a checkpoint");
  std::uint16_t version;
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != kCkptVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  std::int32_t meta[5];
  is.read(reinterpret_cast<char*>(meta), sizeof meta);

  Checkpoint ckpt;
  ckpt.config.d = meta[0];
  ckpt.config.layers = meta[1];
  ckpt.config.max_len = meta[2];
  ckpt.params = ModelParams::init(ckpt.config, meta[3], 0, meta[4] != 0);

  std::uint32_t count;
  is.read(reinterpret_cast<char*>(&count), sizeof count);
  auto entries = ckpt.params.entries();
  if (count != entries.size()) throw std::runtime_error("checkpoint parameter count mismatch");
  for (auto& [name, mat] : entries) {
    std::uint16_t len;
    is.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string stored(len, '\0');
    is.read(stored.data(), len);
    if (stored != name) throw std::runtime_error("checkpoint parameter order mismatch at " + stored);
    std::uint32_t shape[2];
    is.read(reinterpret_cast<char*>(shape), sizeof shape);
    if (static_cast<Eigen::Index>(shape[0]) != mat->rows() ||
        static_cast<Eigen::Index>(shape[1]) != mat->cols())
      throw std::runtime_error("checkpoint shape mismatch for " + stored);
    is.read(reinterpret_cast<char*>(mat->data()),
            static_cast<std::streamsize>(sizeof(Real) * static_cast<std::size_t>(mat->size())));
  }
  if (!is) throw std::runtime_error(path + " truncated");
  return ckpt;
}

}  // namespace sgcl
