#include "kbad/detectors/detector.hpp"

#include <algorithm>
#include <array>

namespace kbad {

namespace {

constexpr std::array<const char*, 7> kDetectorNames{"manhattan", "scaled_manhattan", "autoencoder",
                                                     "cae",       "vae",              "ocsvm",
                                                     "ensemble"};

void read_blocks(DetectorConfig& c, const KeyValueConfig& kv) {
  auto& ae = c.autoencoder;
  ae.hidden = kv.get_int_list("autoencoder.hidden", ae.hidden);
  ae.learning_rate = kv.get_double("autoencoder.learning_rate", ae.learning_rate);
  ae.epochs = static_cast<int>(kv.get_int("autoencoder.epochs", ae.epochs));

  auto& cae = c.contractive;
  cae.hidden = static_cast<int>(kv.get_int("cae.hidden", cae.hidden));
  cae.lambda = kv.get_double("cae.lambda", cae.lambda);
  cae.learning_rate = kv.get_double("cae.learning_rate", cae.learning_rate);
  cae.epochs = static_cast<int>(kv.get_int("cae.epochs", cae.epochs));

  auto& vae = c.variational;
  vae.hidden = kv.get_int_list("vae.hidden", vae.hidden);
  vae.latent = static_cast<int>(kv.get_int("vae.latent", vae.latent));
  vae.learning_rate = kv.get_double("vae.learning_rate", vae.learning_rate);
  vae.batch_size = static_cast<int>(kv.get_int("vae.batch_size", vae.batch_size));
  vae.epochs = static_cast<int>(kv.get_int("vae.epochs", vae.epochs));

  auto& svm = c.ocsvm;
  svm.nu = kv.get_double("ocsvm.nu", svm.nu);
  svm.gamma = kv.get_double("ocsvm.gamma", svm.gamma);
  svm.max_iterations = static_cast<int>(kv.get_int("ocsvm.max_iterations", svm.max_iterations));
  svm.tolerance = kv.get_double("ocsvm.tolerance", svm.tolerance);
}

void write_block(const DetectorConfig& c, KeyValueConfig& kv) {
  if (c.name == "autoencoder") {
    kv.set("autoencoder.hidden", format_int_list(c.autoencoder.hidden));
    kv.set("autoencoder.learning_rate", format_double(c.autoencoder.learning_rate));
    kv.set("autoencoder.epochs", std::to_string(c.autoencoder.epochs));
  } else if (c.name == "cae") {
    kv.set("cae.hidden", std::to_string(c.contractive.hidden));
    kv.set("cae.lambda", format_double(c.contractive.lambda));
    kv.set("cae.learning_rate", format_double(c.contractive.learning_rate));
    kv.set("cae.epochs", std::to_string(c.contractive.epochs));
  } else if (c.name == "vae") {
    kv.set("vae.hidden", format_int_list(c.variational.hidden));
    kv.set("vae.latent", std::to_string(c.variational.latent));
    kv.set("vae.learning_rate", format_double(c.variational.learning_rate));
    kv.set("vae.batch_size", std::to_string(c.variational.batch_size));
    kv.set("vae.epochs", std::to_string(c.variational.epochs));
  } else if (c.name == "ocsvm") {
    kv.set("ocsvm.nu", format_double(c.ocsvm.nu));
    kv.set("ocsvm.gamma", format_double(c.ocsvm.gamma));
    kv.set("ocsvm.max_iterations", std::to_string(c.ocsvm.max_iterations));
    kv.set("ocsvm.tolerance", format_double(c.ocsvm.tolerance));
  }
}

// Splits at commas that are not inside braces.
std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : s) {
    if (ch == '{') ++depth;
    if (ch == '}') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& item : out) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? std::string() : item.substr(b, e - b + 1);
  }
  return out;
}

std::vector<DetectorConfig> parse_members(const std::string& list) {
  std::vector<DetectorConfig> members;
  if (list.empty()) return members;
  for (const auto& item : split_top_level(list)) {
    if (item.empty()) throw Error("ensemble.members: empty member");
    members.push_back(parse_detector_spec(item));
  }
  return members;
}

class ManhattanModel final : public Model {
 public:
  explicit ManhattanModel(ManhattanState s) : state_(std::move(s)) {}
  double score(const FeatureVector& q) const override { return manhattan_score(state_, q); }

 private:
  ManhattanState state_;
};

class AutoencoderModel final : public Model {
 public:
  explicit AutoencoderModel(AutoencoderState s) : state_(std::move(s)) {}
  double score(const FeatureVector& q) const override { return ae_score(state_, q); }

 private:
  AutoencoderState state_;
};

class ContractiveModel final : public Model {
 public:
  explicit ContractiveModel(ContractiveState s) : state_(std::move(s)) {}
  double score(const FeatureVector& q) const override { return cae_score(state_, q); }

 private:
  ContractiveState state_;
};

class VariationalModel final : public Model {
 public:
  explicit VariationalModel(VariationalState s) : state_(std::move(s)) {}
  double score(const FeatureVector& q) const override { return vae_score(state_, q); }

 private:
  VariationalState state_;
};

class OcsvmModel final : public Model {
 public:
  explicit OcsvmModel(OneClassSvmState s) : state_(std::move(s)) {}
  double score(const FeatureVector& q) const override { return ocsvm_score(state_, q); }

 private:
  OneClassSvmState state_;
};

class EnsembleModel final : public Model {
 public:
  explicit EnsembleModel(std::vector<std::unique_ptr<const Model>> members)
      : members_(std::move(members)) {}

  double score(const FeatureVector& q) const override {
    const auto s = member_scores(q);
    return ensemble_score(s);
  }

  std::vector<double> member_scores(const FeatureVector& q) const override {
    std::vector<double> s;
    s.reserve(members_.size());
    for (const auto& m : members_) s.push_back(m->score(q));
    return s;
  }

 private:
  std::vector<std::unique_ptr<const Model>> members_;
};

}  // namespace

bool is_known_detector(const std::string& name) {
  return std::find(kDetectorNames.begin(), kDetectorNames.end(), name) != kDetectorNames.end();
}

DetectorConfig parse_detector_spec(const std::string& spec) {
  const auto brace = spec.find('{');
  std::string name = spec.substr(0, brace);
  if (!is_known_detector(name)) throw Error("unknown detector '" + name + "'");
  if (name == "ensemble") throw Error("ensembles cannot be nested");
  KeyValueConfig kv;
  if (brace != std::string::npos) {
    if (spec.back() != '}') throw Error("detector spec '" + spec + "': missing '}'");
    const std::string body = spec.substr(brace + 1, spec.size() - brace - 2);
    const std::string prefix = name == "autoencoder" ? "autoencoder." : name + ".";
    for (const auto& item : split_top_level(body)) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error("detector spec '" + spec + "': expected key=value");
      std::string value = item.substr(eq + 1);
      std::replace(value.begin(), value.end(), ';', ',');
      kv.set(prefix + item.substr(0, eq), value);
    }
  }
  DetectorConfig c;
  c.name = name;
  read_blocks(c, kv);
  kv.require_all_used("detector spec '" + spec + "'");
  return c;
}

std::string format_detector_spec(const DetectorConfig& config) {
  KeyValueConfig kv;
  write_block(config, kv);
  if (kv.values().empty()) return config.name;
  std::string out = config.name + "{";
  bool first = true;
  for (const auto& [key, value] : kv.values()) {
    if (!first) out += ",";
    first = false;
    std::string v = value;
    std::replace(v.begin(), v.end(), ',', ';');  // list separators inside a spec
    out += key.substr(key.find('.') + 1) + "=" + v;
  }
  return out + "}";
}

DetectorConfig detector_config_from(const KeyValueConfig& kv) {
  DetectorConfig c;
  c.name = kv.get_string("detector", c.name);
  if (!is_known_detector(c.name)) throw Error("unknown detector '" + c.name + "'");
  read_blocks(c, kv);
  c.members = parse_members(kv.get_string("ensemble.members", ""));
  if (c.name == "ensemble" && c.members.size() < 2) {
    throw Error("ensemble detector needs at least 2 members in ensemble.members");
  }
  return c;
}

void write_detector_config(const DetectorConfig& config, KeyValueConfig& kv) {
  kv.set("detector", config.name);
  write_block(config, kv);
  if (config.name == "ensemble") {
    std::string list;
    for (std::size_t i = 0; i < config.members.size(); ++i) {
      if (i) list += ", ";
      list += format_detector_spec(config.members[i]);
    }
    kv.set("ensemble.members", list);
  }
}

std::unique_ptr<const Model> fit_detector(const DetectorConfig& config,
                                          std::span<const FeatureVector> templates,
                                          std::uint64_t seed) {
  const auto& n = config.name;
  if (n == "manhattan") return std::make_unique<ManhattanModel>(manhattan_fit(templates, false));
  if (n == "scaled_manhattan") return std::make_unique<ManhattanModel>(manhattan_fit(templates, true));
  if (n == "autoencoder") return std::make_unique<AutoencoderModel>(ae_fit(templates, config.autoencoder, seed));
  if (n == "cae") return std::make_unique<ContractiveModel>(cae_fit(templates, config.contractive, seed));
  if (n == "vae") return std::make_unique<VariationalModel>(vae_fit(templates, config.variational, seed));
  if (n == "ocsvm") return std::make_unique<OcsvmModel>(ocsvm_fit(templates, config.ocsvm));
  if (n == "ensemble") {
    if (config.members.size() < 2) throw Error("ensemble needs at least 2 members");
    std::vector<std::unique_ptr<const Model>> members;
    for (std::size_t i = 0; i < config.members.size(); ++i) {
      members.push_back(fit_detector(config.members[i], templates, derive_seed(seed, i)));
    }
    return std::make_unique<EnsembleModel>(std::move(members));
  }
  throw Error("unknown detector '" + n + "'");
}

}  // namespace kbad
