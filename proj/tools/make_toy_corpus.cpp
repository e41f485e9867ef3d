// Regenerates the bundled toy corpus: make_toy_corpus OUT_DIR
#include <filesystem>
#include <fstream>
#include <iostream>

#include "glyphshift/toy_corpus.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_toy_corpus OUT_DIR\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, std::size_t count, std::uint64_t seed) {
    std::ofstream out(dir / name, std::ios::binary);
    out << glyphshift::serialize_dataset(glyphshift::make_toy_corpus(count, seed));
  };
  write("toy_train.csv", glyphshift::kToyTrainSize, glyphshift::kToyTrainSeed);
  write("toy_test.csv", glyphshift::kToyTestSize, glyphshift::kToyTestSeed);
  return 0;
}
