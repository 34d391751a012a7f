// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/app/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "hpcsentry/error.hpp"

namespace hpcsentry::app {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::BadFormat, "bad value for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorCode::BadFormat, "bad boolean for '" + std::string(key) + "': '" + std::string(text) + "'");
}

// One binding per config key: how to print it and how to assign it.
struct Binding {
  std::string key;
  std::function<std::string()> get;
  std::function<void(std::string_view)> set;
};

template <typename T>
Binding bind_number(std::string key, T& field) {
  Binding b;
  b.key = key;
  b.get = [&field] {
    if constexpr (std::is_floating_point_v<T>) {
      return format_double(field);
    } else {
      return std::to_string(field);
    }
  };
  b.set = [&field, key](std::string_view v) { field = parse_number<T>(key, v); };
  return b;
}

Binding bind_bool(std::string key, bool& field) {
  Binding b;
  b.key = key;
  b.get = [&field] { return std::string(field ? "true" : "false"); };
  b.set = [&field, key](std::string_view v) { field = parse_bool(key, v); };
  return b;
}

void add_training(std::vector<Binding>& out, const std::string& prefix, TrainingConfig& t) {
  out.push_back(bind_number(prefix + "epochs", t.epochs));
  out.push_back(bind_number(prefix + "learning_rate", t.learning_rate));
  out.push_back(bind_number(prefix + "batch_size", t.batch_size));
  out.push_back(bind_number(prefix + "gradient_clip", t.gradient_clip));
}

void add_pipeline(std::vector<Binding>& out, PipelineConfig& c) {
  out.push_back(bind_number("window_len", c.window_len));
  out.push_back(bind_number("n_fft", c.n_fft));
  out.push_back(bind_bool("spectral_remove_dc", c.spectral_remove_dc));
  out.push_back(bind_number("persistence_k", c.persistence_k));
  out.push_back(bind_number("rho_high", c.correlation.rho_high));
  out.push_back(bind_number("rho_low", c.correlation.rho_low));
  out.push_back(bind_number("m_consecutive", c.correlation.m_consecutive));
  out.push_back(bind_number("sampling_interval_ms", c.sampling_interval_ms));
}

std::vector<Binding> config_bindings(AppConfig& c) {
  std::vector<Binding> b;
  b.push_back(bind_number("seed", c.seed));
  b.push_back(bind_number("hidden_dim", c.training.hidden_dim));
  b.push_back(bind_number("train_stride", c.training.train_stride));
  add_training(b, "stage1.", c.training.stage1);
  add_training(b, "stage2.", c.training.stage2);
  add_pipeline(b, c.training.base);
  b.push_back(bind_number("attack.files", c.attack.files));
  b.push_back(bind_number("attack.file_size_bytes", c.attack.file_size_bytes));
  b.push_back(bind_number("attack.rate_files_per_s", c.attack.rate_files_per_s));
  b.push_back(bind_number("attack.backup_capacity", c.attack.backup_capacity));
  b.push_back(bind_number("attack.quantum_ticks", c.attack.quantum_ticks));
  return b;
}

void add_calibration(std::vector<Binding>& out, const std::string& prefix, ThresholdCalibration& c) {
  out.push_back(bind_number(prefix + "mu", c.mu));
  out.push_back(bind_number(prefix + "sigma", c.sigma));
  out.push_back(bind_number(prefix + "threshold", c.threshold));
}

std::vector<Binding> manifest_bindings(RunManifest& m) {
  std::vector<Binding> b;
  b.push_back(bind_number("seed", m.seed));
  add_calibration(b, "calibration1.", m.config.calibration_1);
  add_calibration(b, "calibration2.", m.config.calibration_2);
  add_pipeline(b, m.config);
  return b;
}

void apply(std::vector<Binding>& bindings, const KeyValues& kv, const std::function<bool(const std::string&)>& extra) {
  for (const auto& [key, value] : kv) {
    auto it = std::find_if(bindings.begin(), bindings.end(), [&](const Binding& b) { return b.key == key; });
    if (it != bindings.end()) {
      it->set(value);
    } else if (!extra(key)) {
      throw Error(ErrorCode::BadFormat, "unknown key '" + key + "'");
    }
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(ErrorCode::BadFormat, "line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    if (!kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw Error(ErrorCode::BadFormat, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + '=' + v + '\n';
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

AppConfig parse_config(std::string_view text) {
  AppConfig c;
  auto bindings = config_bindings(c);
  const KeyValues kv = parse_key_values(text);
  // "epochs" and "learning_rate" set both stages; the map is ordered, so
  // "stage1.*"/"stage2.*" keys are applied afterwards and win.
  apply(bindings, kv, [&](const std::string& key) {
    if (key == "epochs") {
      c.training.stage1.epochs = c.training.stage2.epochs = parse_number<std::size_t>(key, kv.at(key));
      return true;
    }
    if (key == "learning_rate") {
      c.training.stage1.learning_rate = c.training.stage2.learning_rate = parse_number<double>(key, kv.at(key));
      return true;
    }
    return false;
  });
  c.training.base.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string format_config(const AppConfig& config) {
  AppConfig copy = config;
  KeyValues kv;
  for (const auto& b : config_bindings(copy)) kv[b.key] = b.get();
  return format_key_values(kv);
}

std::string format_manifest(const RunManifest& manifest) {
  RunManifest copy = manifest;
  KeyValues kv;
  for (const auto& b : manifest_bindings(copy)) kv[b.key] = b.get();
  kv["model1"] = manifest.model1;
  kv["model2"] = manifest.model2;
  kv["scaler"] = manifest.scaler;
  kv["spectral_scaler"] = manifest.spectral_scaler;
  kv["template_count"] = std::to_string(manifest.templates.size());
  for (std::size_t i = 0; i < manifest.templates.size(); ++i) kv["template." + std::to_string(i)] = manifest.templates[i];
  return format_key_values(kv);
}

RunManifest parse_manifest(std::string_view text) {
  RunManifest m;
  auto bindings = manifest_bindings(m);
  const KeyValues kv = parse_key_values(text);
  std::size_t template_count = 0;
  apply(bindings, kv, [&](const std::string& key) {
    if (key == "model1") m.model1 = kv.at(key);
    else if (key == "model2") m.model2 = kv.at(key);
    else if (key == "scaler") m.scaler = kv.at(key);
    else if (key == "spectral_scaler") m.spectral_scaler = kv.at(key);
    else if (key == "template_count") template_count = parse_number<std::size_t>(key, kv.at(key));
    else return key.rfind("template.", 0) == 0;
    return true;
  });
  for (std::size_t i = 0; i < template_count; ++i) {
    auto it = kv.find("template." + std::to_string(i));
    if (it == kv.end()) throw Error(ErrorCode::BadFormat, "manifest lacks template." + std::to_string(i));
    m.templates.push_back(it->second);
  }
  for (const char* required : {"calibration1.threshold", "calibration2.threshold"}) {
    if (!kv.count(required)) throw Error(ErrorCode::BadFormat, std::string("manifest lacks ") + required);
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  write_text_file(path, format_manifest(manifest));
}

RunManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_text_file(path)); }

std::string format_scaler(const Scaler& scaler) {
  KeyValues kv;
  for (std::size_t c = 0; c < kChannels; ++c) {
    kv["mean." + std::string(kColumnNames[c])] = format_double(scaler.mean[c]);
    kv["std." + std::string(kColumnNames[c])] = format_double(scaler.std[c]);
  }
  return format_key_values(kv);
}

Scaler parse_scaler(std::string_view text) {
  const KeyValues kv = parse_key_values(text);
  Scaler s;
  for (std::size_t c = 0; c < kChannels; ++c) {
    for (auto [prefix, target] : {std::pair{"mean.", &s.mean[c]}, std::pair{"std.", &s.std[c]}}) {
      const std::string key = prefix + std::string(kColumnNames[c]);
      auto it = kv.find(key);
      if (it == kv.end()) throw Error(ErrorCode::BadFormat, "scaler lacks " + key);
      *target = parse_number<double>(key, it->second);
    }
    if (!(s.std[c] > 0.0)) throw Error(ErrorCode::BadFormat, "scaler std must be positive");
  }
  if (kv.size() != 2 * kChannels) throw Error(ErrorCode::BadFormat, "scaler has unexpected keys");
  return s;
}

LoadedRun load_run(const std::filesystem::path& manifest_path) {
  const RunManifest m = load_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  auto resolve = [&](const std::string& rel) {
    const auto p = dir / rel;
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::Io, "manifest references missing file " + p.string());
    return p;
  };
  LoadedRun run;
  run.models.time_domain = load_model(resolve(m.model1).string());
  run.models.spectral = load_model(resolve(m.model2).string());
  run.models.time_domain.input_scaler = parse_scaler(read_text_file(resolve(m.scaler)));
  run.models.spectral.input_scaler = parse_scaler(read_text_file(resolve(m.spectral_scaler)));
  for (const auto& t : m.templates) run.templates.push_back(load_template(resolve(t).string()));
  run.config = m.config;
  run.seed = m.seed;
  run.config.validate();
  if (run.templates.empty()) throw Error(ErrorCode::InvalidArgument, "manifest lists no templates");
  if (run.models.time_domain.seq_len() != run.config.window_len ||
      run.models.spectral.seq_len() != run.config.n_fft / 2 + 1) {
    throw Error(ErrorCode::InvalidArgument, "model shapes do not match the manifest configuration");
  }
  return run;
}

Regime parse_profile(std::string_view name) {
  std::string norm;
  for (char ch : name) {
    if (ch != '_' && ch != '-') norm += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  for (auto r : {Regime::Baseline, Regime::RepeatedEncryption, Regime::HighCompute, Regime::DiskEncryption}) {
    std::string candidate;
    for (char ch : to_string(r)) candidate += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (candidate == norm) return r;
  }
  throw Error(ErrorCode::UnknownProfile, "unknown profile '" + std::string(name) + "'");
}

}  // namespace hpcsentry::app
