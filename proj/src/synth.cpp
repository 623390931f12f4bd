#include "kbad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "kbad/dataset_io.hpp"
#include "kbad/events.hpp"
#include "kbad/random.hpp"

namespace kbad {

namespace {

struct Profile {
  std::vector<double> latency;   // log-mean of the latency into each position
  std::vector<double> duration;  // log-mean hold; for Shift, log-mean overlap past the next press
};

struct PlannedKey {
  std::string key;
  double press = 0.0;
  double release = 0.0;
};

std::string padded(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

std::vector<std::string> draw_name(Rng& rng, const SynthConfig& c) {
  const int n = std::uniform_int_distribution<int>(c.min_keys, c.max_keys)(rng);
  const int letters = n - 3;
  const int first = std::uniform_int_distribution<int>(2, letters - 2)(rng);
  std::uniform_int_distribution<int> letter(0, 25);
  std::bernoulli_distribution left(0.5);
  std::vector<std::string> keys;
  keys.push_back(left(rng) ? "LeftShift" : "RightShift");
  for (int i = 0; i < first; ++i) keys.push_back(std::string(1, static_cast<char>('A' + letter(rng))));
  keys.push_back("Space");
  keys.push_back(left(rng) ? "LeftShift" : "RightShift");
  for (int i = 0; i < letters - first; ++i) keys.push_back(std::string(1, static_cast<char>('A' + letter(rng))));
  return keys;
}

Profile draw_profile(Rng& rng, const std::vector<std::string>& keys, const SynthConfig& c) {
  std::uniform_real_distribution<double> base_lat(std::log(120.0), std::log(260.0));
  std::uniform_real_distribution<double> base_dur(std::log(70.0), std::log(130.0));
  std::uniform_real_distribution<double> shift_lead(std::log(40.0), std::log(200.0));
  std::uniform_real_distribution<double> overlap(std::log(5.0), std::log(60.0));
  std::normal_distribution<double> spread(0.0, c.position_sd);
  const double lat = base_lat(rng);
  const double dur = base_dur(rng);
  Profile p;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const bool after_shift = i > 0 && is_shift(keys[i - 1]);
    p.latency.push_back(after_shift ? shift_lead(rng) : lat + spread(rng));
    p.duration.push_back(is_shift(keys[i]) ? overlap(rng) : dur + spread(rng));
  }
  return p;
}

Profile blend(const Profile& own, const Profile& other, double weight, double shift) {
  Profile p = own;
  for (std::size_t i = 0; i < p.latency.size(); ++i) {
    p.latency[i] += weight * (other.latency[i] - own.latency[i]) + shift;
    p.duration[i] += weight * (other.duration[i] - own.duration[i]) + shift;
  }
  return p;
}

// One exclusive outcome per sample; the rates are fractions of samples.
std::pair<Perturbation, Perturbation> draw_perturbation(Rng& rng, const SynthConfig& c) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const bool first_site = unit(rng) < 0.5;
  auto at = [&](Perturbation p) {
    return first_site ? std::make_pair(p, Perturbation::None) : std::make_pair(Perturbation::None, p);
  };
  if (u < c.capslock) return at(Perturbation::CapsLock);
  if (u < c.capslock + c.shift_drop) return {Perturbation::Drop, Perturbation::Drop};
  if (u < c.capslock + c.shift_drop + c.shift_transpose) return {Perturbation::None, Perturbation::Transpose};
  return {Perturbation::None, Perturbation::None};
}

KeystrokeSequence render(Rng& rng, const std::vector<std::string>& keys, const Profile& p, const SynthConfig& c,
                         Perturbation site0, Perturbation site1) {
  std::normal_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution pause(c.pause_rate);
  const double tempo = std::exp(c.tempo_sd * unit(rng));
  const std::size_t n = keys.size();

  std::vector<double> press(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double sd = (is_shift(keys[i]) || is_shift(keys[i - 1])) ? c.modifier_sd_scale * c.latency_sd : c.latency_sd;
    double gap = tempo * std::exp(p.latency[i] + sd * unit(rng));
    if (pause(rng)) gap *= 1.0 + c.pause_scale;
    press[i] = press[i - 1] + gap;
  }
  std::vector<PlannedKey> planned(n);
  for (std::size_t i = 0; i < n; ++i) {
    planned[i].key = keys[i];
    planned[i].press = press[i];
    const double hold = tempo * std::exp(p.duration[i] + (is_shift(keys[i]) ? c.modifier_sd_scale : 1.0) * c.duration_sd * unit(rng));
    planned[i].release = is_shift(keys[i]) && i + 1 < n ? press[i + 1] + hold : press[i] + hold;
  }

  const std::size_t second = static_cast<std::size_t>(
      std::find_if(keys.begin() + 1, keys.end(), [](const std::string& k) { return is_shift(k); }) - keys.begin());
  std::vector<bool> keep(n, true);
  auto apply = [&](std::size_t i, Perturbation what) {
    switch (what) {
      case Perturbation::None: break;
      case Perturbation::CapsLock: {
        const double tap = tempo * std::exp(std::log(70.0) + c.duration_sd * unit(rng));
        planned[i].key = "CapsLock";
        planned[i].release = planned[i].press + std::min(tap, 0.8 * (press[i + 1] - press[i]));
        break;
      }
      case Perturbation::Drop: keep[i] = false; break;
      case Perturbation::Transpose: {
        const double lead = tempo * std::exp(std::log(40.0) + 0.3 * unit(rng));
        const double space = planned[i - 1].press;
        const double before = i >= 2 ? planned[i - 2].press : space - lead;
        planned[i].press = std::max(space - lead, (before + space) / 2.0);
        break;
      }
    }
  };
  apply(0, site0);
  apply(second, site1);

  std::vector<PlannedKey> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) kept.push_back(planned[i]);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const PlannedKey& a, const PlannedKey& b) { return a.press < b.press; });

  KeystrokeSequence seq;
  Millis last_press = -1;
  for (const auto& k : kept) {
    Keystroke ks;
    ks.key = k.key;
    if (c.clock_quantum_ms > 0) {
      const double q = c.clock_quantum_ms;
      ks.press_t = static_cast<Millis>(std::floor(k.press / q) * q);
      ks.release_t = static_cast<Millis>(std::floor(k.release / q) * q);
    } else {
      ks.press_t = std::max<Millis>(std::llround(k.press), last_press + 1);
      ks.release_t = std::max<Millis>(std::llround(k.release), ks.press_t);
    }
    last_press = ks.press_t;
    seq.keystrokes.push_back(ks);
  }
  // A key cannot be down twice: an earlier press of the same key must be
  // released by the time it is pressed again.
  for (std::size_t i = 0; i < seq.size(); ++i) {
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq.keystrokes[j].key == seq.keystrokes[i].key) {
        seq.keystrokes[i].release_t = std::min(seq.keystrokes[i].release_t, seq.keystrokes[j].press_t);
        break;
      }
    }
  }
  return seq;
}

}  // namespace

std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::None: return "none";
    case Perturbation::CapsLock: return "capslock";
    case Perturbation::Drop: return "drop";
    case Perturbation::Transpose: return "transpose";
  }
  return "?";
}

SynthConfig SynthConfig::from(const KeyValueConfig& kv) {
  SynthConfig c;
  c.subjects = static_cast<int>(kv.get_int("subjects", c.subjects));
  c.min_keys = static_cast<int>(kv.get_int("min_keys", c.min_keys));
  c.max_keys = static_cast<int>(kv.get_int("max_keys", c.max_keys));
  c.templates = static_cast<int>(kv.get_int("templates", c.templates));
  c.queries = static_cast<int>(kv.get_int("queries", c.queries));
  c.impostors_min = static_cast<int>(kv.get_int("impostors_min", c.impostors_min));
  c.impostors_max = static_cast<int>(kv.get_int("impostors_max", c.impostors_max));
  c.impostor_identities = static_cast<int>(kv.get_int("impostor_identities", c.impostor_identities));
  c.shift_drop = kv.get_double("shift_drop", c.shift_drop);
  c.shift_transpose = kv.get_double("shift_transpose", c.shift_transpose);
  c.capslock = kv.get_double("capslock", c.capslock);
  c.impostor_blend = kv.get_double("impostor_blend", c.impostor_blend);
  c.impostor_shift = kv.get_double("impostor_shift", c.impostor_shift);
  c.latency_sd = kv.get_double("latency_sd", c.latency_sd);
  c.duration_sd = kv.get_double("duration_sd", c.duration_sd);
  c.position_sd = kv.get_double("position_sd", c.position_sd);
  c.tempo_sd = kv.get_double("tempo_sd", c.tempo_sd);
  c.modifier_sd_scale = kv.get_double("modifier_sd_scale", c.modifier_sd_scale);
  c.pause_rate = kv.get_double("pause_rate", c.pause_rate);
  c.pause_scale = kv.get_double("pause_scale", c.pause_scale);
  c.clock_quantum_ms = static_cast<int>(kv.get_int("clock_quantum_ms", c.clock_quantum_ms));
  const long long seed = kv.get_int("seed", static_cast<long long>(c.seed));
  if (seed < 0) throw Error("seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  kv.require_all_used("synth config");
  c.validate();
  return c;
}

KeyValueConfig SynthConfig::snapshot() const {
  KeyValueConfig kv;
  kv.set("subjects", std::to_string(subjects));
  kv.set("min_keys", std::to_string(min_keys));
  kv.set("max_keys", std::to_string(max_keys));
  kv.set("templates", std::to_string(templates));
  kv.set("queries", std::to_string(queries));
  kv.set("impostors_min", std::to_string(impostors_min));
  kv.set("impostors_max", std::to_string(impostors_max));
  kv.set("impostor_identities", std::to_string(impostor_identities));
  kv.set("shift_drop", format_double(shift_drop));
  kv.set("shift_transpose", format_double(shift_transpose));
  kv.set("capslock", format_double(capslock));
  kv.set("impostor_blend", format_double(impostor_blend));
  kv.set("impostor_shift", format_double(impostor_shift));
  kv.set("latency_sd", format_double(latency_sd));
  kv.set("duration_sd", format_double(duration_sd));
  kv.set("position_sd", format_double(position_sd));
  kv.set("tempo_sd", format_double(tempo_sd));
  kv.set("modifier_sd_scale", format_double(modifier_sd_scale));
  kv.set("pause_rate", format_double(pause_rate));
  kv.set("pause_scale", format_double(pause_scale));
  kv.set("clock_quantum_ms", std::to_string(clock_quantum_ms));
  kv.set("seed", std::to_string(seed));
  return kv;
}

void SynthConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(name) + " must be in [0,1]");
  };
  prob(shift_drop, "shift_drop");
  prob(shift_transpose, "shift_transpose");
  prob(capslock, "capslock");
  prob(pause_rate, "pause_rate");
  if (capslock + shift_drop + shift_transpose > 1.0) {
    throw Error("capslock + shift_drop + shift_transpose must not exceed 1");
  }
  if (subjects < 0) throw Error("subjects must be non-negative");
  if (min_keys < 7 || max_keys < min_keys) throw Error("key range must satisfy 7 <= min_keys <= max_keys");
  if (templates < 2) throw Error("templates must be at least 2");
  if (queries < 0) throw Error("queries must be non-negative");
  if (impostors_min < 0 || impostors_max < impostors_min || impostors_max > queries) {
    throw Error("impostor range must satisfy 0 <= impostors_min <= impostors_max <= queries");
  }
  if (impostor_identities < 1) throw Error("impostor_identities must be positive");
  if (latency_sd < 0 || duration_sd < 0 || position_sd < 0 || tempo_sd < 0 || pause_scale < 0 ||
      modifier_sd_scale < 0) {
    throw Error("spread parameters must be non-negative");
  }
  if (clock_quantum_ms < 0) throw Error("clock_quantum_ms must be non-negative");
}

SynthDataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  SynthDataset out;
  const int width = config.queries > 99 ? 3 : 2;
  for (int s = 0; s < config.subjects; ++s) {
    const std::string id = padded("s", s, 3);
    Rng rng(derive_seed(config.seed, "subject/" + id));
    const auto keys = draw_name(rng, config);
    const Profile own = draw_profile(rng, keys, config);
    std::vector<Profile> impostors;
    for (int k = 0; k < config.impostor_identities; ++k) {
      impostors.push_back(blend(own, draw_profile(rng, keys, config), config.impostor_blend, config.impostor_shift));
    }
    out.canonical[id] = keys;

    const int n_imp = std::uniform_int_distribution<int>(config.impostors_min, config.impostors_max)(rng);
    std::vector<Label> labels(static_cast<std::size_t>(config.queries), Label::Genuine);
    std::fill_n(labels.begin(), n_imp, Label::Impostor);
    std::shuffle(labels.begin(), labels.end(), rng);

    auto make = [&](const std::string& sample_id, Role role, Label label) {
      const Profile* profile = &own;
      if (label == Label::Impostor) {
        profile = &impostors[std::uniform_int_distribution<std::size_t>(0, impostors.size() - 1)(rng)];
      }
      const auto [site0, site1] = draw_perturbation(rng, config);
      PerturbationRecord log{id, sample_id, site0, site1};
      Sample sample;
      sample.subject_id = id;
      sample.sample_id = sample_id;
      sample.role = role;
      sample.label = label;
      sample.sequence = render(rng, keys, *profile, config, log.site0, log.site1);
      out.perturbations.push_back(std::move(log));
      return sample;
    };

    SubjectSamples subject;
    for (int t = 0; t < config.templates; ++t) {
      subject.templates.push_back(make(padded("t", t, 1), Role::Template, Label::Genuine));
    }
    for (int q = 0; q < config.queries; ++q) {
      subject.queries.push_back(make(padded("q", q, width), Role::Query, labels[static_cast<std::size_t>(q)]));
    }
    out.dataset.subjects.emplace(id, std::move(subject));
  }
  return out;
}

std::string format_perturbations(const std::vector<PerturbationRecord>& records) {
  std::string out = "subject_id\tsample_id\tshift_site_0\tshift_site_1\n";
  for (const auto& r : records) {
    out += r.subject_id + "\t" + r.sample_id + "\t" + to_string(r.site0) + "\t" + to_string(r.site1) + "\n";
  }
  return out;
}

void write_synthetic(const SynthDataset& data, const SynthConfig& config, const std::filesystem::path& root) {
  write_dataset(data.dataset, root, true);
  write_text_file(root / "ground_truth.tsv", format_labels(dataset_labels(data.dataset)));
  write_text_file(root / "perturbations.tsv", format_perturbations(data.perturbations));
  write_text_file(root / "synth.conf", config.snapshot().format());
}

}  // namespace kbad
