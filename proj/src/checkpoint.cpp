// SPDX-License-Identifier: Apache-2.0
#include "hfseq/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hfseq {
namespace {

constexpr char kMagic[] = "HFSEQ1\n";

void write_u64_le(std::ostream& os, std::uint64_t bits) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return bits;
}

std::string join_sizes(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> parse_sizes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelConfig& config,
                     const ParameterSet& params) {
  if (params.theta.size() != params.layout.total())
    throw DimensionError("checkpoint: theta length does not match layout");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << kMagic;
  os << "architecture " << to_string(config.architecture) << "\n";
  os << "vocab_size " << config.vocab_size << "\n";
  os << "hidden_sizes " << join_sizes(config.hidden_sizes) << "\n";
  os << "factor_size " << config.factor_size << "\n";
  os << "output_size " << config.out() << "\n";
  os << "output_mode " << to_string(config.output_mode) << "\n";
  os << "extra_biases " << (config.extra_biases ? 1 : 0) << "\n";
  os << "param_count " << params.theta.size() << "\n";
  os << "seed " << config.seed << "\n";
  os << "theta\n";
  for (Index i = 0; i < params.theta.size(); ++i)
    write_u64_le(os, std::bit_cast<std::uint64_t>(params.theta[i]));
  if (!os) throw IoError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(is, line) || line != "HFSEQ1")
    throw IoError("'" + path + "' is not a checkpoint (bad magic)");

  ModelConfig config;
  Index count = -1;
  while (std::getline(is, line)) {
    if (line == "theta") break;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw IoError("malformed checkpoint header line: " + line);
    const std::string key = line.substr(0, sp);
    const std::string value = line.substr(sp + 1);
    if (key == "architecture") config.architecture = architecture_from_string(value);
    else if (key == "vocab_size") config.vocab_size = std::stoi(value);
    else if (key == "hidden_sizes") config.hidden_sizes = parse_sizes(value);
    else if (key == "factor_size") config.factor_size = std::stoi(value);
    else if (key == "output_size") config.output_size = std::stoi(value);
    else if (key == "output_mode") config.output_mode = output_mode_from_string(value);
    else if (key == "extra_biases") config.extra_biases = value != "0";
    else if (key == "param_count") count = std::stoll(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else throw IoError("unknown checkpoint header key: " + key);
  }
  if (line != "theta") throw IoError("checkpoint missing theta section");
  config.validate();

  ParameterSet params{ParamLayout::build(config), Vector()};
  if (count != params.layout.total())
    throw IoError("checkpoint param_count " + std::to_string(count) +
                  " does not match layout total " + std::to_string(params.layout.total()));
  params.theta.resize(count);
  for (Index i = 0; i < count; ++i) {
    params.theta[i] = std::bit_cast<double>(read_u64_le(is));
    if (!is) throw IoError("checkpoint truncated while reading theta");
  }
  return Checkpoint{config, std::move(params)};
}

}  // namespace hfseq
