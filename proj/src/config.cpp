#include "sgcl/config.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgcl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

Real to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    Real r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad numeric value '" + v + "' for " + key);
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer value '" + v + "' for " + key);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw std::runtime_error("config: bad boolean value '" + v + "' for " + key);
}

std::vector<AugmentMethod> to_pool(const std::string& v) {
  std::vector<AugmentMethod> pool;
  std::istringstream in(v);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    auto m = method_from_name(tok);
    if (!m) throw std::runtime_error("config: unknown augmentation method '" + tok + "'");
    pool.push_back(*m);
  }
  if (pool.empty()) throw std::runtime_error("config: empty augmentation pool");
  return pool;
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " is not 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: empty key on line " + std::to_string(line_no));
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_kv_text(buf.str());
}

void apply_kv(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, v] : kv) {
    if (key == "d") cfg.encoder.d = to_int(key, v);
    else if (key == "layers") cfg.encoder.layers = to_int(key, v);
    else if (key == "max_len") {
      cfg.encoder.max_len = to_int(key, v);
      cfg.augment.max_len = cfg.encoder.max_len;
    }
    else if (key == "tau_main") cfg.loss.tau_main = to_real(key, v);
    else if (key == "tau_cl") cfg.loss.tau_cl = to_real(key, v);
    else if (key == "lambda") cfg.loss.lambda = to_real(key, v);
    else if (key == "exclude_self_positive") cfg.loss.exclude_self_positive = to_bool(key, v);
    else if (key == "gamma") {
      Real g = to_real(key, v);
      cfg.augment.gamma_crop = cfg.augment.gamma_mask = cfg.augment.gamma_reorder =
          cfg.augment.gamma_change = cfg.augment.gamma_inject = g;
    }
    else if (key == "gamma_crop") cfg.augment.gamma_crop = to_real(key, v);
    else if (key == "gamma_mask") cfg.augment.gamma_mask = to_real(key, v);
    else if (key == "gamma_reorder") cfg.augment.gamma_reorder = to_real(key, v);
    else if (key == "gamma_change") cfg.augment.gamma_change = to_real(key, v);
    else if (key == "gamma_inject") cfg.augment.gamma_inject = to_real(key, v);
    else if (key == "pool") cfg.augment.pool = to_pool(v);
    else if (key == "methods_per_batch") cfg.augment.methods_per_batch = to_int(key, v);
    else if (key == "global_context") cfg.augment.global_context = to_bool(key, v);
    else if (key == "batch_size") cfg.train.batch_size = to_int(key, v);
    else if (key == "lr") cfg.train.lr = to_real(key, v);
    else if (key == "beta1") cfg.train.beta1 = to_real(key, v);
    else if (key == "beta2") cfg.train.beta2 = to_real(key, v);
    else if (key == "adam_eps") cfg.train.adam_eps = to_real(key, v);
    else if (key == "l2") cfg.train.l2 = to_real(key, v);
    else if (key == "decay_factor") cfg.train.decay_factor = to_real(key, v);
    else if (key == "decay_every_epochs") cfg.train.decay_every_epochs = to_int(key, v);
    else if (key == "epochs") cfg.train.epochs = to_int(key, v);
    else if (key == "seed") cfg.train.seed = static_cast<std::uint64_t>(std::stoull(v));
    else if (key == "validation_fraction") cfg.train.validation_fraction = to_real(key, v);
    else if (key == "k_damping") cfg.k_damping = to_real(key, v);
    else if (key == "graph_directed") cfg.graph_directed = to_bool(key, v);
    else if (key == "ln_affine") cfg.ln_affine = to_bool(key, v);
    else throw std::runtime_error("config: unknown key '" + key + "'");
  }
}

std::string dump_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "d = " << cfg.encoder.d << "\n"
     << "layers = " << cfg.encoder.layers << "\n"
     << "max_len = " << cfg.encoder.max_len << "\n"
     << "tau_main = " << cfg.loss.tau_main << "\n"
     << "tau_cl = " << cfg.loss.tau_cl << "\n"
     << "lambda = " << cfg.loss.lambda << "\n"
     << "exclude_self_positive = " << (cfg.loss.exclude_self_positive ? "true" : "false") << "\n"
     << "gamma_crop = " << cfg.augment.gamma_crop << "\n"
     << "gamma_mask = " << cfg.augment.gamma_mask << "\n"
     << "gamma_reorder = " << cfg.augment.gamma_reorder << "\n"
     << "gamma_change = " << cfg.augment.gamma_change << "\n"
     << "gamma_inject = " << cfg.augment.gamma_inject << "\n";
  os << "pool = ";
  for (std::size_t i = 0; i < cfg.augment.pool.size(); ++i)
    os << (i ? "," : "") << method_name(cfg.augment.pool[i]);
  os << "\n"
     << "methods_per_batch = " << cfg.augment.methods_per_batch << "\n"
     << "global_context = " << (cfg.augment.global_context ? "true" : "false") << "\n"
     << "batch_size = " << cfg.train.batch_size << "\n"
     << "lr = " << cfg.train.lr << "\n"
     << "beta1 = " << cfg.train.beta1 << "\n"
     << "beta2 = " << cfg.train.beta2 << "\n"
     << "adam_eps = " << cfg.train.adam_eps << "\n"
     << "l2 = " << cfg.train.l2 << "\n"
     << "decay_factor = " << cfg.train.decay_factor << "\n"
     << "decay_every_epochs = " << cfg.train.decay_every_epochs << "\n"
     << "epochs = " << cfg.train.epochs << "\n"
     << "seed = " << cfg.train.seed << "\n"
     << "validation_fraction = " << cfg.train.validation_fraction << "\n"
     << "k_damping = " << cfg.k_damping << "\n"
     << "graph_directed = " << (cfg.graph_directed ? "true" : "false") << "\n"
     << "ln_affine = " << (cfg.ln_affine ? "true" : "false") << "\n";
  return os.str();
}

void write_manifest(const RunConfig& cfg, const std::string& dir, std::uint64_t corpus_hash,
                    const std::string& note) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir + "/manifest.txt", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write manifest in " + dir);
  auto now = std::chrono::system_clock::now();
  os << "# " << kVersionString << "\n"
     << "started_unix_ms = "
     << std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count()
     << "\n"
     << "corpus_hash = " << corpus_hash << "\n";
  if (!note.empty()) os << "note = " << note << "\n";
  os << dump_config(cfg);
}

}  // namespace sgcl
