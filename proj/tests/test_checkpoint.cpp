#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mixad/checkpoint.hpp"
#include "mixad/error.hpp"
#include "mixad/rng.hpp"
#include "support/testutil.hpp"

using namespace mixad;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "mixad_ckpt_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("round trip is bit-exact") {
  Rng rng(5);
  Checkpoint ckpt;
  ckpt.metadata["format"] = "test";
  ckpt.metadata["note"] = "contains = and , and spaces";
  ckpt.tensors.emplace("a", testsupport::random_tensor({3, 7}, rng, -1e6, 1e6));
  ckpt.tensors.emplace("b.nested.name", testsupport::random_tensor({16}, rng, -1e-300, 1e-300));
  // Values that stress text formats are trivial for raw doubles.
  ckpt.tensors.emplace("c", Tensor::from_data({4}, {0.1, 1.0 / 3.0, -0.0, 2.2250738585072014e-308}));

  const fs::path path = temp_dir() / "roundtrip.ckpt";
  save_checkpoint(ckpt, path);
  const Checkpoint loaded = load_checkpoint(path);

  CHECK(loaded.metadata == ckpt.metadata);
  REQUIRE(loaded.tensors.size() == ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    const Tensor& got = loaded.require(name);
    REQUIRE(got.shape() == t.shape());
    for (std::size_t i = 0; i < t.numel(); ++i) {
      // Bit equality, not approximate.
      CHECK(std::memcmp(&got.values()[i], &t.values()[i], sizeof(double)) == 0);
    }
  }
}

TEST_CASE("missing tensor and metadata are named in errors") {
  Checkpoint ckpt;
  CHECK_THROWS_WITH_AS(ckpt.require("head.w"), doctest::Contains("head.w"), IoError);
  CHECK_THROWS_WITH_AS(ckpt.require_meta("nodes"), doctest::Contains("nodes"), IoError);
}

TEST_CASE("corrupt files are rejected") {
  const fs::path path = temp_dir() / "corrupt.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "definitely not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(path), IoError);

  CHECK_THROWS_AS(load_checkpoint(temp_dir() / "does_not_exist.ckpt"), IoError);

  // Truncated: valid magic then garbage length.
  {
    std::ofstream out(path, std::ios::binary);
    out << "MXCK0001";
    out << "\xff\xff";
  }
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
}
