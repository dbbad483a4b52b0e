// Writes the synthetic fixture images and a manifest listing them.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "aesthetic/imaging.hpp"
#include "fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <dir>\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "fixtures.jsonl");
  for (const auto& f : aesthetic::fixtures::all()) {
    const auto png = aesthetic::encode_png(f.make());
    aesthetic::write_file_bytes(dir / (f.id + ".png"), png);
    manifest << "{\"id\":\"" << f.id << "\",\"path\":\"" << f.id << ".png\"}\n";
  }
  return manifest ? 0 : 3;
}
