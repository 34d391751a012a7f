// SPDX-License-Identifier: Apache-2.0
//
// Text model format, one field per line; doubles use the shortest
// round-trip representation so load(save(m)) == m bit for bit.
//
//   hpcsentry-seqae 1
//   input_dim 5
//   seq_len 100
//   hidden_dim 32
//   epochs 50
//   learning_rate 0.01
//   batch_size 32
//   seed 7
//   gradient_clip 5
//   scaler_mean <5 values>
//   scaler_std <5 values>
//   parameters <count>
//   <one value per line>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hpcsentry/error.hpp"
#include "hpcsentry/seqae.hpp"

namespace hpcsentry {
namespace {

constexpr std::string_view kMagic = "hpcsentry-seqae";
constexpr int kVersion = 1;

std::string shortest(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

template <typename T>
T parse_token(const std::string& tok, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::BadFormat, std::string("model field ") + what + ": bad value '" + tok + "'");
  }
  return value;
}

std::istringstream expect_line(std::istream& in, std::string_view key) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::BadFormat, "model truncated before '" + std::string(key) + "'");
  std::istringstream fields(line);
  std::string k;
  fields >> k;
  if (k != key) throw Error(ErrorCode::BadFormat, "expected '" + std::string(key) + "', got '" + k + "'");
  return fields;
}

template <typename T>
T read_scalar(std::istream& in, const char* key) {
  auto fields = expect_line(in, key);
  std::string tok;
  fields >> tok;
  return parse_token<T>(tok, key);
}

ChannelValues read_channels(std::istream& in, const char* key) {
  auto fields = expect_line(in, key);
  ChannelValues out{};
  for (auto& v : out) {
    std::string tok;
    if (!(fields >> tok)) throw Error(ErrorCode::BadFormat, std::string(key) + " needs 5 values");
    v = parse_token<double>(tok, key);
  }
  return out;
}

}  // namespace

void write_model(std::ostream& out, const SequenceAutoencoder& m) {
  const auto& c = m.training_config;
  out << kMagic << ' ' << kVersion << '\n'
      << "input_dim " << m.input_dim() << '\n'
      << "seq_len " << m.seq_len() << '\n'
      << "hidden_dim " << m.hidden_dim() << '\n'
      << "epochs " << c.epochs << '\n'
      << "learning_rate " << shortest(c.learning_rate) << '\n'
      << "batch_size " << c.batch_size << '\n'
      << "seed " << c.seed << '\n'
      << "gradient_clip " << shortest(c.gradient_clip) << '\n';
  out << "scaler_mean";
  for (double v : m.input_scaler.mean) out << ' ' << shortest(v);
  out << "\nscaler_std";
  for (double v : m.input_scaler.std) out << ' ' << shortest(v);
  out << "\nparameters " << m.parameter_count() << '\n';
  for (double v : m.parameters()) out << shortest(v) << '\n';
}

SequenceAutoencoder read_model(std::istream& in) {
  {
    auto fields = expect_line(in, kMagic);
    int version = 0;
    fields >> version;
    if (version != kVersion) throw Error(ErrorCode::BadFormat, "unsupported model version " + std::to_string(version));
  }
  const auto input_dim = read_scalar<std::size_t>(in, "input_dim");
  const auto seq_len = read_scalar<std::size_t>(in, "seq_len");
  const auto hidden_dim = read_scalar<std::size_t>(in, "hidden_dim");
  TrainingConfig c;
  c.epochs = read_scalar<std::size_t>(in, "epochs");
  c.learning_rate = read_scalar<double>(in, "learning_rate");
  c.batch_size = read_scalar<std::size_t>(in, "batch_size");
  c.seed = read_scalar<std::uint64_t>(in, "seed");
  c.gradient_clip = read_scalar<double>(in, "gradient_clip");

  SequenceAutoencoder m(input_dim, seq_len, hidden_dim, 0);
  m.training_config = c;
  m.input_scaler.mean = read_channels(in, "scaler_mean");
  m.input_scaler.std = read_channels(in, "scaler_std");

  const auto count = read_scalar<std::size_t>(in, "parameters");
  if (count != m.parameter_count()) {
    throw Error(ErrorCode::BadFormat, "parameter count " + std::to_string(count) + " does not match dims (" +
                                          std::to_string(m.parameter_count()) + ")");
  }
  auto params = m.parameters();
  std::string line;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorCode::BadFormat, "model truncated at parameter " + std::to_string(i));
    params[i] = parse_token<double>(line, "parameters");
  }
  if (!m.parameters_finite()) throw Error(ErrorCode::BadFormat, "model has non-finite parameters");
  return m;
}

void save_model(const std::string& path, const SequenceAutoencoder& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_model(out, model);
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

SequenceAutoencoder load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_model(in);
}

}  // namespace hpcsentry
