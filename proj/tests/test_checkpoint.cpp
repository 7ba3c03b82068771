// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "hfseq/checkpoint.hpp"

using namespace hfseq;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.architecture = Architecture::mlstm;
  c.vocab_size = 5;
  c.hidden_sizes = {4};
  c.factor_size = 4;
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  const ModelConfig config = tiny_config();
  Rng rng(7);
  ParameterSet p = init_params(config, InitScheme::dense(0.7), rng);
  // include values that stress the binary encoding
  p.theta[0] = -0.0;
  p.theta[1] = 1e-308;
  p.theta[2] = -1.7976931348623157e308;

  const std::string path = "ckpt_roundtrip_test.hfseq";
  save_checkpoint(path, config, p);
  const Checkpoint loaded = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(loaded.config.architecture == config.architecture);
  CHECK(loaded.config.vocab_size == config.vocab_size);
  CHECK(loaded.config.hidden_sizes == config.hidden_sizes);
  CHECK(loaded.config.factor_size == config.factor_size);
  CHECK(loaded.config.seed == config.seed);
  REQUIRE(loaded.params.theta.size() == p.theta.size());
  for (Index i = 0; i < p.theta.size(); ++i)
    CHECK(std::bit_cast<std::uint64_t>(loaded.params.theta[i]) ==
          std::bit_cast<std::uint64_t>(p.theta[i]));
}

TEST_CASE("bad magic is rejected") {
  const std::string path = "ckpt_badmagic_test.hfseq";
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTHFSEQ\ngarbage";
  }
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
  std::remove(path.c_str());
}

TEST_CASE("truncated theta is rejected") {
  const ModelConfig config = tiny_config();
  Rng rng(7);
  const ParameterSet p = init_params(config, InitScheme::dense(0.1), rng);
  const std::string path = "ckpt_trunc_test.hfseq";
  save_checkpoint(path, config, p);
  // chop the file ~20 bytes short
  std::ifstream is(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  is.close();
  bytes.resize(bytes.size() - 20);
  std::ofstream os(path, std::ios::binary);
  os << bytes;
  os.close();
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
  std::remove(path.c_str());
}

TEST_CASE("missing file raises IoError") {
  CHECK_THROWS_AS(load_checkpoint("definitely_not_here.hfseq"), IoError);
}
