#include <doctest.h>

#include <random>

#include "f2p/cli/checkpoint.hpp"
#include "f2p/cli/config.hpp"
#include "f2p/imitator/imitator.hpp"

using namespace f2p;

TEST_CASE("config defaults carry the published hyperparameters") {
  const PipelineConfig cfg;
  CHECK(cfg.imitator.batch_size == 16);
  CHECK(cfg.imitator.momentum == 0.9);
  CHECK(cfg.imitator.learning_rate == 0.01);
  CHECK(cfg.imitator.lr_decay == 0.1);
  CHECK(cfg.imitator.decay_every == 50);
  CHECK(cfg.segmenter.learning_rate == 0.001);
  CHECK(cfg.search.alpha == 0.01);
  CHECK(cfg.search.beta == 100.0);
  CHECK(cfg.search.max_iters == 50);
  CHECK(cfg.search.learning_rate == 10.0);
  CHECK(cfg.search.lr_decay == 0.2);
  CHECK(cfg.search.decay_every == 5);
  CHECK(cfg.data_n == 2000);
}

TEST_CASE("config text applies in order and later entries win") {
  PipelineConfig cfg;
  cfg.apply_text("# comment\nimitator.epochs = 12\n\nsearch.alpha=0.5  # trailing\nimitator.epochs=13\n");
  CHECK(cfg.imitator.epochs == 13);
  CHECK(cfg.search.alpha == 0.5);
  cfg.set("search.use_identity", "false");
  CHECK_FALSE(cfg.search.use_identity);
  CHECK(cfg.json()["search"]["alpha"] == 0.5);
  CHECK(cfg.json()["imitator"]["epochs"] == 13);
}

TEST_CASE("config rejects unknown keys and malformed values") {
  PipelineConfig cfg;
  CHECK_THROWS_WITH_AS(cfg.set("imitator.epoch", "3"), doctest::Contains("unknown config key 'imitator.epoch'"),
                       Error);
  CHECK_THROWS_WITH_AS(cfg.set("data.n", "-4"), doctest::Contains("invalid value"), Error);
  CHECK_THROWS_WITH_AS(cfg.set("search.beta", "abc"), doctest::Contains("invalid value"), Error);
  CHECK_THROWS_WITH_AS(cfg.apply_text("novalue\n"), doctest::Contains("line 1"), Error);
  cfg.set("data.n", "0");
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("n must be positive"), Error);
}

TEST_CASE("checkpoint encoding is stable and rejects duplicates") {
  imitator::ImitatorNet<float> net(3);
  const auto bytes = encode_checkpoint(net.state());
  CHECK(bytes.substr(0, 4) == "F2PC");
  CHECK(encode_checkpoint(net.state()) == bytes);
  auto state = net.state();
  state.push_back(state.front());
  CHECK_THROWS_AS(encode_checkpoint(state), Error);
  auto wrong_version = bytes;
  wrong_version[4] = 9;
  CHECK_THROWS_WITH_AS(decode_checkpoint(wrong_version), doctest::Contains("incompatible checkpoint"), Error);
}

TEST_CASE("CRC detects every single-bit flip in 100 random trials") {
  imitator::ImitatorNet<float> net(3);
  const auto bytes = encode_checkpoint(net.state());
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pos(4 + 4, bytes.size() - 1);
  std::uniform_int_distribution<int> bit(0, 7);
  std::size_t detected = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto corrupted = bytes;
    corrupted[pos(rng)] ^= static_cast<char>(1 << bit(rng));
    try {
      decode_checkpoint(corrupted);
    } catch (const Error&) {
      ++detected;
    }
  }
  CHECK(detected == 100);
}
